#pragma once

// Synthetic robot-axis scenarios and CSV ingestion of signal traces.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dapm {

inline constexpr double kDefaultNoiseStd = 1e-4;
inline constexpr std::size_t kDefaultDaySamples = 300;

/// One day of position/speed/torque samples for a single axis.
///
/// Speed and torque share `motion_rate_hz`. Position may be sampled slower; its length
/// then equals motion length * position_rate / motion_rate.
struct SignalTrace {
    int day = 1;
    std::vector<double> position;
    std::vector<double> speed;
    std::vector<double> torque;
    double position_rate_hz = 1.0;
    double motion_rate_hz = 1.0;

    std::size_t motion_length() const noexcept { return speed.size(); }

    /// Throws ParameterError when lengths disagree, rates are non-positive or a sample is not finite.
    void validate() const;

    friend bool operator==(const SignalTrace&, const SignalTrace&) = default;
};

/// Sinusoidal operating pattern. Frequencies are cycles per daily window.
struct OperationProfile {
    double position_amp = 2.0;
    double position_freq = 9.0;
    double speed_amp = 10.0;
    double speed_freq = 10.0;
    double torque_freq = 10.0;
    double torque_ripple_amp = 0.05;
    double torque_ripple_freq = 300.0;
    double noise_std = kDefaultNoiseStd;

    void validate() const;

    static OperationProfile o1(double noise_std = kDefaultNoiseStd);
    static OperationProfile o2(double noise_std = kDefaultNoiseStd);
};

/// Torque fault: samples in [start_sample, start_sample + duration) are replaced by
/// sin(2pi base n) + ripple_amp sin(2pi ripple n) + drift_amp sin(2pi drift n) + noise.
struct AnomalySpec {
    std::size_t start_sample = 150;
    std::size_t duration = 60;
    double base_freq = 10.0;
    double ripple_amp = 0.3;
    double ripple_freq = 100.0;
    double drift_amp = 0.3;
    double drift_freq = 1.0;
    double noise_std = kDefaultNoiseStd;
    std::uint64_t seed = 0;
};

enum class DayKind { O1, O2, AnomalousO1 };

std::string_view to_string(DayKind kind) noexcept;
/// Accepts "O1", "O2" and "A_O1" (case-sensitive).
DayKind parse_day_kind(std::string_view text);

struct ScenarioSchedule {
    std::vector<DayKind> days;
    std::uint64_t seed = 0;
    double noise_std = kDefaultNoiseStd;

    /// {O1, O1, O1, A_O1, O1, O2, O2, O2, O1}, optionally followed by one more O1 day.
    static ScenarioSchedule reference(std::uint64_t seed, bool append_trailing_o1 = false);
};

struct LabeledTrace {
    SignalTrace trace;
    DayKind kind = DayKind::O1;
    bool anomalous = false;
};

OperationProfile profile_for(DayKind kind, double noise_std);

/// Sample i uses normalized time n = i / n_samples. Both rates are set to n_samples Hz.
SignalTrace generate_day(const OperationProfile& profile, std::size_t n_samples, std::uint64_t seed);

SignalTrace inject_anomaly(SignalTrace trace, const AnomalySpec& spec);

/// seed XOR a 64-bit mix of the day index.
std::uint64_t day_seed(std::uint64_t seed, std::size_t day_index) noexcept;

/// One trace per schedule entry, days numbered from 1. Only A_O1 entries are labeled anomalous.
std::vector<LabeledTrace> generate_scenario(const ScenarioSchedule& schedule, std::size_t n_samples);

// --- CSV dataset format -------------------------------------------------------------------
//
// `day,channel,sample_index,value`, one (day, channel) group after another, each ordered by
// sample_index. Rates live in a sidecar `<stem>.meta.json`.

struct DatasetMetadata {
    double position_rate_hz = 1.0;
    double motion_rate_hz = 1.0;
    std::size_t n_samples_per_day = 0;
};

std::filesystem::path metadata_path(const std::filesystem::path& csv_path);

void write_csv(std::span<const SignalTrace> traces, const std::filesystem::path& path);

/// Reads the sidecar metadata when present; without it both rates default to 1 Hz.
std::vector<SignalTrace> read_csv(const std::filesystem::path& path);

/// `day,kind,anomalous` ground-truth table written next to generated datasets.
void write_labels(std::span<const LabeledTrace> days, const std::filesystem::path& path);

struct DayLabel {
    int day = 0;
    DayKind kind = DayKind::O1;
    bool anomalous = false;
};

std::vector<DayLabel> read_labels(const std::filesystem::path& path);

} // namespace dapm
