#include "dapm/preprocess.hpp"

#include "dapm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dapm {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// Non-centred three-point end slope, limited to keep the end segment monotone.
double end_slope(double h0, double h1, double del0, double del1) {
    double d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if (sign(d) != sign(del0)) {
        d = 0.0;
    } else if (sign(del0) != sign(del1) && std::abs(d) > std::abs(3.0 * del0)) {
        d = 3.0 * del0;
    }
    return d;
}

} // namespace

std::vector<double> pchip_slopes(std::span<const double> knots, std::span<const double> values) {
    const std::size_t n = knots.size();
    if (n != values.size()) {
        throw ParameterError("knots and values differ in length");
    }
    if (n < 2) {
        throw ParameterError("monotone cubic interpolation needs at least 2 knots");
    }
    std::vector<double> h(n - 1);
    std::vector<double> del(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = knots[k + 1] - knots[k];
        if (!(h[k] > 0.0)) {
            throw ParameterError("knots must be strictly increasing (index " + std::to_string(k + 1) + ")");
        }
        del[k] = (values[k + 1] - values[k]) / h[k];
    }

    std::vector<double> d(n, 0.0);
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (del[k - 1] == 0.0 || del[k] == 0.0 || sign(del[k - 1]) != sign(del[k])) {
            d[k] = 0.0;
            continue;
        }
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    return d;
}

MonotoneCubic::MonotoneCubic(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)), slopes_(pchip_slopes(knots_, values_)) {}

double MonotoneCubic::operator()(double x) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    k = std::min(k, knots_.size() - 2);

    const double h = knots_[k + 1] - knots_[k];
    const double t = (x - knots_[k]) / h;
    if (t == 1.0) {
        return values_[k + 1];
    }
    // Increment form: a flat segment (equal values, zero slopes) is reproduced exactly, so rounding
    // cannot introduce a step against the data direction.
    const double u = 1.0 - t;
    return values_[k] + t * t * (3.0 - 2.0 * t) * (values_[k + 1] - values_[k]) +
           h * t * u * (u * slopes_[k] - t * slopes_[k + 1]);
}

std::vector<double> upsample_position(std::span<const double> position, int factor) {
    if (factor < 1) {
        throw ParameterError("upsampling factor must be >= 1");
    }
    if (position.size() < 2) {
        throw ParameterError("upsampling needs at least 2 samples");
    }
    if (factor == 1) {
        return {position.begin(), position.end()};
    }
    const std::size_t len = position.size();
    std::vector<double> knots(len);
    for (std::size_t i = 0; i < len; ++i) {
        knots[i] = static_cast<double>(i);
    }
    // The inserted zero placeholders are overwritten by the interpolant, so evaluate it directly.
    const MonotoneCubic interp(knots, {position.begin(), position.end()});
    const auto f = static_cast<std::size_t>(factor);
    std::vector<double> out(f * (len - 1) + 1);
    for (std::size_t k = 0; k + 1 < len; ++k) {
        out[k * f] = position[k];
        for (std::size_t j = 1; j < f; ++j) {
            out[k * f + j] = interp(static_cast<double>(k) + static_cast<double>(j) / static_cast<double>(f));
        }
    }
    out.back() = position.back();
    return out;
}

UniformTrace assemble(const SignalTrace& trace) {
    trace.validate();
    const double ratio = trace.motion_rate_hz / trace.position_rate_hz;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw ParameterError("motion rate must be an integer multiple of the position rate");
    }
    const int factor = static_cast<int>(rounded);

    std::vector<double> position = factor == 1 ? trace.position : upsample_position(trace.position, factor);
    const std::size_t m = std::min({position.size(), trace.speed.size(), trace.torque.size()});

    UniformTrace u;
    u.day = trace.day;
    u.rate_hz = trace.motion_rate_hz;
    u.channels.resize(3, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        u.channels(0, c) = trace.speed[i];
        u.channels(1, c) = position[i];
        u.channels(2, c) = trace.torque[i];
    }
    return u;
}

} // namespace dapm
