#pragma once

// Short-time Fourier magnitude features.

#include "dapm/preprocess.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace dapm {

enum class WindowFunction { rectangular, hann };
enum class ChannelCombination { none, pairwise_products };

std::string_view to_string(WindowFunction w) noexcept;
std::string_view to_string(ChannelCombination c) noexcept;
WindowFunction parse_window_function(std::string_view text);
ChannelCombination parse_channel_combination(std::string_view text);

struct StftConfig {
    int window_len = 75;
    int hop = 25;
    WindowFunction window = WindowFunction::hann;
    ChannelCombination combinations = ChannelCombination::none;

    int bins() const noexcept { return window_len / 2 + 1; }
    /// Number of complete frames for a signal of the given length (0 if the window does not fit).
    Eigen::Index frame_count(Eigen::Index signal_len) const noexcept;
    /// Throws ParameterError unless 1 <= hop <= window_len <= signal_len.
    void validate(Eigen::Index signal_len) const;

    friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// Periodic window of the given length (all ones for rectangular).
std::vector<double> window_coefficients(WindowFunction w, int length);

/// Frame j covers samples [j*hop, j*hop + window_len); one-sided bins 0..window_len/2.
Eigen::MatrixXcd stft(std::span<const double> signal, const StftConfig& config);

/// Rows: speed, position, torque, then (pairwise_products) speed*position, speed*torque, position*torque.
Eigen::MatrixXd combine_channels(const UniformTrace& u, ChannelCombination mode);

struct FeatureMatrix {
    Eigen::MatrixXd data;              ///< frames x (channels * bins), entries |STFT| >= 0
    std::vector<double> frame_times;   ///< frame centre, seconds from the start of the day
    StftConfig config;

    Eigen::Index frames() const noexcept { return data.rows(); }
    Eigen::Index features() const noexcept { return data.cols(); }
};

/// Per frame, the channel magnitude spectra concatenated in channel order.
FeatureMatrix feature_matrix(const UniformTrace& u, const StftConfig& config);

/// Header f0..f{K-1}, one row per frame.
void write_feature_csv(const FeatureMatrix& features, const std::filesystem::path& path);

} // namespace dapm
