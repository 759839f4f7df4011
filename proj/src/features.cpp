#include "dapm/features.hpp"

#include "dapm/error.hpp"
#include "dapm/text_io.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace dapm {

std::string_view to_string(WindowFunction w) noexcept {
    return w == WindowFunction::hann ? "hann" : "rectangular";
}

std::string_view to_string(ChannelCombination c) noexcept {
    return c == ChannelCombination::pairwise_products ? "pairwise_products" : "none";
}

WindowFunction parse_window_function(std::string_view text) {
    if (text == "hann") return WindowFunction::hann;
    if (text == "rectangular" || text == "rect") return WindowFunction::rectangular;
    throw ParameterError("unknown window function '" + std::string(text) + "'");
}

ChannelCombination parse_channel_combination(std::string_view text) {
    if (text == "none") return ChannelCombination::none;
    if (text == "pairwise_products") return ChannelCombination::pairwise_products;
    throw ParameterError("unknown channel combination '" + std::string(text) + "'");
}

Eigen::Index StftConfig::frame_count(Eigen::Index signal_len) const noexcept {
    if (window_len < 1 || hop < 1 || signal_len < window_len) {
        return 0;
    }
    return (signal_len - window_len) / hop + 1;
}

void StftConfig::validate(Eigen::Index signal_len) const {
    if (window_len < 1) {
        throw ParameterError("window_len must be >= 1");
    }
    if (hop < 1 || hop > window_len) {
        throw ParameterError("hop must lie in [1, window_len]");
    }
    if (window_len > signal_len) {
        throw ParameterError("window_len " + std::to_string(window_len) + " exceeds signal length " +
                             std::to_string(signal_len));
    }
}

std::vector<double> window_coefficients(WindowFunction w, int length) {
    std::vector<double> c(static_cast<std::size_t>(length), 1.0);
    if (w == WindowFunction::hann) {
        for (int n = 0; n < length; ++n) {
            c[static_cast<std::size_t>(n)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
        }
    }
    return c;
}

Eigen::MatrixXcd stft(std::span<const double> signal, const StftConfig& config) {
    const auto len = static_cast<Eigen::Index>(signal.size());
    config.validate(len);
    const Eigen::Index frames = config.frame_count(len);
    const int bins = config.bins();
    const auto window = window_coefficients(config.window, config.window_len);

    Eigen::FFT<double> fft;
    std::vector<double> frame(static_cast<std::size_t>(config.window_len));
    std::vector<std::complex<double>> spectrum;
    Eigen::MatrixXcd out(frames, bins);
    for (Eigen::Index j = 0; j < frames; ++j) {
        const auto start = static_cast<std::size_t>(j * config.hop);
        for (std::size_t n = 0; n < frame.size(); ++n) {
            frame[n] = signal[start + n] * window[n];
        }
        // The FFT backend cannot plan a length-1 transform, which is the identity anyway.
        if (frame.size() == 1) {
            spectrum.assign(1, frame[0]);
        } else {
            fft.fwd(spectrum, frame);
        }
        for (int k = 0; k < bins; ++k) {
            out(j, k) = spectrum[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

Eigen::MatrixXd combine_channels(const UniformTrace& u, ChannelCombination mode) {
    if (mode == ChannelCombination::none) {
        return u.channels;
    }
    Eigen::MatrixXd out(6, u.length());
    out.topRows(3) = u.channels;
    out.row(3) = u.channels.row(0).cwiseProduct(u.channels.row(1));
    out.row(4) = u.channels.row(0).cwiseProduct(u.channels.row(2));
    out.row(5) = u.channels.row(1).cwiseProduct(u.channels.row(2));
    return out;
}

FeatureMatrix feature_matrix(const UniformTrace& u, const StftConfig& config) {
    config.validate(u.length());
    const Eigen::MatrixXd channels = combine_channels(u, config.combinations);
    const Eigen::Index frames = config.frame_count(u.length());
    const int bins = config.bins();

    FeatureMatrix fm;
    fm.config = config;
    fm.data.resize(frames, channels.rows() * bins);
    std::vector<double> signal(static_cast<std::size_t>(u.length()));
    for (Eigen::Index c = 0; c < channels.rows(); ++c) {
        Eigen::Map<Eigen::RowVectorXd>(signal.data(), u.length()) = channels.row(c);
        fm.data.middleCols(c * bins, bins) = stft(signal, config).cwiseAbs();
    }
    fm.frame_times.resize(static_cast<std::size_t>(frames));
    for (Eigen::Index j = 0; j < frames; ++j) {
        fm.frame_times[static_cast<std::size_t>(j)] =
            (static_cast<double>(j * config.hop) + 0.5 * config.window_len) / u.rate_hz;
    }
    return fm;
}

void write_feature_csv(const FeatureMatrix& features, const std::filesystem::path& path) {
    std::string body;
    for (Eigen::Index k = 0; k < features.features(); ++k) {
        body += (k ? ",f" : "f") + std::to_string(k);
    }
    body += '\n';
    for (Eigen::Index j = 0; j < features.frames(); ++j) {
        for (Eigen::Index k = 0; k < features.features(); ++k) {
            if (k) body += ',';
            body += format_double(features.data(j, k));
        }
        body += '\n';
    }
    write_text_file(path, body);
}

} // namespace dapm
