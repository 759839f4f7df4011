#pragma once

// Rate alignment: monotone cubic upsampling of the slow position channel.

#include "dapm/signals.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace dapm {

/// Fritsch-Carlson derivative estimates for a monotonicity-preserving cubic Hermite interpolant.
///
/// Interior slopes are the weighted harmonic mean of the adjacent secants, or zero where the
/// secants change sign or either vanishes. End slopes use the one-sided three-point formula,
/// clamped so the end segments cannot overshoot. Throws ParameterError for fewer than two
/// knots or knots that are not strictly increasing.
std::vector<double> pchip_slopes(std::span<const double> knots, std::span<const double> values);

/// Piecewise cubic Hermite interpolant through (knots, values) with pchip_slopes derivatives.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> knots, std::vector<double> values);

    /// Evaluates at x; values outside the knot range extrapolate the end cubic.
    double operator()(double x) const;

    const std::vector<double>& slopes() const noexcept { return slopes_; }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

/// Resamples a uniformly spaced sequence onto a grid `factor` times finer.
///
/// Output length is factor * (L - 1) + 1; every factor-th output equals the input sample.
std::vector<double> upsample_position(std::span<const double> position, int factor);

/// Channels on a common grid, rows ordered speed, position, torque.
struct UniformTrace {
    int day = 1;
    Eigen::Matrix<double, 3, Eigen::Dynamic> channels;
    double rate_hz = 1.0;

    Eigen::Index length() const noexcept { return channels.cols(); }
};

/// Upsamples position to the motion rate and truncates every channel to the shortest length.
UniformTrace assemble(const SignalTrace& trace);

} // namespace dapm
