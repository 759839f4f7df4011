#include "dapm/signals.hpp"

#include "dapm/error.hpp"
#include "dapm/text_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>

namespace dapm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

void add_noise(std::vector<double>& channel, std::normal_distribution<double>& noise, std::mt19937_64& rng) {
    for (double& x : channel) {
        x += noise(rng);
    }
}

enum class Channel { position, speed, torque };

std::optional<Channel> parse_channel(std::string_view name) {
    if (name == "position") return Channel::position;
    if (name == "speed") return Channel::speed;
    if (name == "torque") return Channel::torque;
    return std::nullopt;
}

std::vector<double>& channel_of(SignalTrace& trace, Channel c) {
    switch (c) {
    case Channel::position: return trace.position;
    case Channel::speed: return trace.speed;
    case Channel::torque: return trace.torque;
    }
    return trace.torque;
}

DatasetMetadata read_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    DatasetMetadata meta;
    try {
        const auto j = nlohmann::json::parse(in);
        meta.position_rate_hz = j.at("position_rate_hz").get<double>();
        meta.motion_rate_hz = j.at("motion_rate_hz").get<double>();
        meta.n_samples_per_day = j.at("n_samples_per_day").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    if (!(meta.position_rate_hz > 0.0) || !(meta.motion_rate_hz > 0.0)) {
        throw FormatError(path.string() + ": sample rates must be positive");
    }
    return meta;
}

} // namespace

void SignalTrace::validate() const {
    if (speed.size() != torque.size()) {
        throw ParameterError("speed and torque lengths differ");
    }
    if (!(position_rate_hz > 0.0) || !(motion_rate_hz > 0.0)) {
        throw ParameterError("sample rates must be positive");
    }
    const double expected = static_cast<double>(speed.size()) * position_rate_hz / motion_rate_hz;
    if (std::abs(expected - static_cast<double>(position.size())) > 1.0) {
        throw ParameterError("position length " + std::to_string(position.size()) +
                             " inconsistent with motion length " + std::to_string(speed.size()));
    }
    if (!all_finite(position) || !all_finite(speed) || !all_finite(torque)) {
        throw ParameterError("trace contains non-finite samples");
    }
}

void OperationProfile::validate() const {
    for (double v : {position_amp, position_freq, speed_amp, speed_freq, torque_freq, torque_ripple_amp,
                     torque_ripple_freq, noise_std}) {
        if (!std::isfinite(v)) {
            throw ParameterError("operation profile has a non-finite field");
        }
    }
    if (noise_std < 0.0) {
        throw ParameterError("noise_std must be >= 0");
    }
}

OperationProfile OperationProfile::o1(double noise_std) {
    OperationProfile p;
    p.noise_std = noise_std;
    return p;
}

OperationProfile OperationProfile::o2(double noise_std) {
    OperationProfile p;
    p.position_freq = 4.0;
    p.speed_freq = 5.0;
    p.torque_freq = 5.0;
    p.noise_std = noise_std;
    return p;
}

std::string_view to_string(DayKind kind) noexcept {
    switch (kind) {
    case DayKind::O1: return "O1";
    case DayKind::O2: return "O2";
    case DayKind::AnomalousO1: return "A_O1";
    }
    return "?";
}

DayKind parse_day_kind(std::string_view text) {
    if (text == "O1") return DayKind::O1;
    if (text == "O2") return DayKind::O2;
    if (text == "A_O1") return DayKind::AnomalousO1;
    throw ParameterError("unknown day kind '" + std::string(text) + "' (expected O1, O2 or A_O1)");
}

ScenarioSchedule ScenarioSchedule::reference(std::uint64_t seed, bool append_trailing_o1) {
    using enum DayKind;
    ScenarioSchedule s;
    s.days = {O1, O1, O1, AnomalousO1, O1, O2, O2, O2, O1};
    if (append_trailing_o1) {
        s.days.push_back(O1);
    }
    s.seed = seed;
    return s;
}

OperationProfile profile_for(DayKind kind, double noise_std) {
    return kind == DayKind::O2 ? OperationProfile::o2(noise_std) : OperationProfile::o1(noise_std);
}

SignalTrace generate_day(const OperationProfile& profile, std::size_t n_samples, std::uint64_t seed) {
    profile.validate();
    if (n_samples == 0) {
        throw ParameterError("n_samples must be >= 1");
    }
    SignalTrace trace;
    trace.position.resize(n_samples);
    trace.speed.resize(n_samples);
    trace.torque.resize(n_samples);
    trace.position_rate_hz = static_cast<double>(n_samples);
    trace.motion_rate_hz = static_cast<double>(n_samples);

    const double len = static_cast<double>(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double n = static_cast<double>(i) / len;
        trace.position[i] = profile.position_amp * std::sin(kTwoPi * profile.position_freq * n);
        trace.speed[i] = profile.speed_amp * std::sin(kTwoPi * profile.speed_freq * n);
        trace.torque[i] = std::sin(kTwoPi * profile.torque_freq * n) +
                          profile.torque_ripple_amp * std::sin(kTwoPi * profile.torque_ripple_freq * n);
    }

    if (profile.noise_std > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, profile.noise_std);
        add_noise(trace.position, noise, rng);
        add_noise(trace.speed, noise, rng);
        add_noise(trace.torque, noise, rng);
    }
    return trace;
}

SignalTrace inject_anomaly(SignalTrace trace, const AnomalySpec& spec) {
    const std::size_t n_samples = trace.torque.size();
    if (spec.start_sample > n_samples || spec.duration > n_samples - spec.start_sample) {
        throw ParameterError("anomaly window [" + std::to_string(spec.start_sample) + ", " +
                             std::to_string(spec.start_sample + spec.duration) + ") outside trace of length " +
                             std::to_string(n_samples));
    }
    if (!(spec.noise_std >= 0.0)) {
        throw ParameterError("anomaly noise_std must be >= 0");
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std > 0.0 ? spec.noise_std : 1.0);

    const double len = static_cast<double>(n_samples);
    for (std::size_t i = spec.start_sample; i < spec.start_sample + spec.duration; ++i) {
        const double n = static_cast<double>(i) / len;
        double v = std::sin(kTwoPi * spec.base_freq * n) + spec.ripple_amp * std::sin(kTwoPi * spec.ripple_freq * n) +
                   spec.drift_amp * std::sin(kTwoPi * spec.drift_freq * n);
        if (spec.noise_std > 0.0) {
            v += noise(rng);
        }
        trace.torque[i] = v;
    }
    return trace;
}

std::uint64_t day_seed(std::uint64_t seed, std::size_t day_index) noexcept {
    return seed ^ splitmix64(static_cast<std::uint64_t>(day_index));
}

std::vector<LabeledTrace> generate_scenario(const ScenarioSchedule& schedule, std::size_t n_samples) {
    if (schedule.days.empty()) {
        throw ParameterError("schedule must contain at least one day");
    }
    std::vector<LabeledTrace> out;
    out.reserve(schedule.days.size());
    for (std::size_t i = 0; i < schedule.days.size(); ++i) {
        const DayKind kind = schedule.days[i];
        const std::uint64_t seed = day_seed(schedule.seed, i + 1);
        SignalTrace trace = generate_day(profile_for(kind, schedule.noise_std), n_samples, seed);
        if (kind == DayKind::AnomalousO1) {
            AnomalySpec spec;
            spec.start_sample = n_samples / 2;
            spec.duration = std::min<std::size_t>(n_samples / 5, n_samples - spec.start_sample);
            spec.noise_std = schedule.noise_std;
            spec.seed = splitmix64(seed);
            trace = inject_anomaly(std::move(trace), spec);
        }
        trace.day = static_cast<int>(i + 1);
        out.push_back({std::move(trace), kind, kind == DayKind::AnomalousO1});
    }
    return out;
}

// --- CSV ---------------------------------------------------------------------------------

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

void write_csv(std::span<const SignalTrace> traces, const std::filesystem::path& path) {
    DatasetMetadata meta;
    if (!traces.empty()) {
        meta.position_rate_hz = traces.front().position_rate_hz;
        meta.motion_rate_hz = traces.front().motion_rate_hz;
        meta.n_samples_per_day = traces.front().motion_length();
    }
    for (const auto& t : traces) {
        t.validate();
        if (t.position_rate_hz != meta.position_rate_hz || t.motion_rate_hz != meta.motion_rate_hz ||
            t.motion_length() != meta.n_samples_per_day) {
            throw ParameterError("all traces in a dataset must share rates and day length");
        }
    }

    std::string body = "day,channel,sample_index,value\n";
    auto emit = [&](int day, std::string_view channel, const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            body += std::to_string(day);
            body += ',';
            body += channel;
            body += ',';
            body += std::to_string(i);
            body += ',';
            body += format_double(values[i]);
            body += '\n';
        }
    };
    for (const auto& t : traces) {
        emit(t.day, "position", t.position);
        emit(t.day, "speed", t.speed);
        emit(t.day, "torque", t.torque);
    }
    write_text_file(path, body);

    nlohmann::ordered_json j;
    j["position_rate_hz"] = meta.position_rate_hz;
    j["motion_rate_hz"] = meta.motion_rate_hz;
    j["n_samples_per_day"] = meta.n_samples_per_day;
    write_text_file(metadata_path(path), j.dump(2) + "\n");
}

std::vector<SignalTrace> read_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    const auto meta_file = metadata_path(path);
    std::optional<DatasetMetadata> meta;
    if (std::filesystem::exists(meta_file)) {
        meta = read_metadata(meta_file);
    }

    std::vector<SignalTrace> traces;
    std::map<int, std::size_t> day_slot;
    std::map<std::pair<int, int>, bool> closed; // (day, channel) groups that already ended
    std::optional<std::pair<int, Channel>> current;
    std::size_t expected_index = 0;
    std::vector<std::size_t> day_last_row;

    LineReader lines(text);
    std::string_view line;
    std::size_t row = 0;
    bool header_seen = false;
    while (lines.next(line, row)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (cells.size() != 4 || cells[0] != "day" || cells[1] != "channel" || cells[2] != "sample_index" ||
                cells[3] != "value") {
                throw FormatError("expected header day,channel,sample_index,value", row);
            }
            continue;
        }
        if (cells.size() != 4) {
            throw FormatError("expected 4 columns, found " + std::to_string(cells.size()), row);
        }
        const int day = parse_int(cells[0], "day", row);
        const auto channel = parse_channel(cells[1]);
        if (!channel) {
            throw FormatError("unknown channel '" + std::string(cells[1]) + "'", row);
        }
        const long long index = parse_int(cells[2], "sample_index", row);
        const double value = parse_double(cells[3], "value", row);

        const std::pair<int, Channel> key{day, *channel};
        if (!current || *current != key) {
            if (current) {
                closed[{current->first, static_cast<int>(current->second)}] = true;
            }
            if (closed.count({day, static_cast<int>(*channel)})) {
                throw FormatError("samples for day " + std::to_string(day) + " " + std::string(cells[1]) +
                                      " are not contiguous",
                                  row);
            }
            current = key;
            expected_index = 0;
        }
        if (index < 0 || static_cast<std::size_t>(index) != expected_index) {
            throw FormatError("sample_index " + std::to_string(index) + " out of order, expected " +
                                  std::to_string(expected_index),
                              row);
        }
        ++expected_index;

        auto [it, inserted] = day_slot.try_emplace(day, traces.size());
        if (inserted) {
            SignalTrace t;
            t.day = day;
            if (meta) {
                t.position_rate_hz = meta->position_rate_hz;
                t.motion_rate_hz = meta->motion_rate_hz;
            }
            traces.push_back(std::move(t));
            day_last_row.push_back(row);
        }
        channel_of(traces[it->second], *channel).push_back(value);
        day_last_row[it->second] = row;
    }

    std::optional<std::size_t> day_length;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& t = traces[k];
        const std::size_t last = day_last_row[k];
        if (t.position.empty() || t.speed.empty() || t.torque.empty()) {
            throw FormatError("day " + std::to_string(t.day) + " is missing a channel", last);
        }
        if (t.speed.size() != t.torque.size()) {
            throw FormatError("day " + std::to_string(t.day) + ": speed and torque lengths differ", last);
        }
        if (meta && meta->n_samples_per_day != 0 && t.motion_length() != meta->n_samples_per_day) {
            throw FormatError("day " + std::to_string(t.day) + " has " + std::to_string(t.motion_length()) +
                                  " samples, metadata says " + std::to_string(meta->n_samples_per_day),
                              last);
        }
        if (day_length && *day_length != t.motion_length()) {
            throw FormatError("day " + std::to_string(t.day) + " length differs from earlier days", last);
        }
        day_length = t.motion_length();
        try {
            t.validate();
        } catch (const ParameterError& e) {
            throw FormatError("day " + std::to_string(t.day) + ": " + e.what(), last);
        }
    }
    return traces;
}

void write_labels(std::span<const LabeledTrace> days, const std::filesystem::path& path) {
    std::string body = "day,kind,anomalous\n";
    for (const auto& d : days) {
        body += std::to_string(d.trace.day) + "," + std::string(to_string(d.kind)) + "," + (d.anomalous ? "1" : "0") +
                "\n";
    }
    write_text_file(path, body);
}

std::vector<DayLabel> read_labels(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<DayLabel> out;
    LineReader lines(text);
    std::string_view line;
    std::size_t row = 0;
    bool header_seen = false;
    while (lines.next(line, row)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (cells.size() != 3 || cells[0] != "day" || cells[1] != "kind" || cells[2] != "anomalous") {
                throw FormatError("expected header day,kind,anomalous", row);
            }
            continue;
        }
        if (cells.size() != 3) {
            throw FormatError("expected 3 columns", row);
        }
        DayLabel label;
        label.day = parse_int(cells[0], "day", row);
        try {
            label.kind = parse_day_kind(cells[1]);
        } catch (const ParameterError& e) {
            throw FormatError(e.what(), row);
        }
        label.anomalous = parse_int(cells[2], "anomalous", row) != 0;
        out.push_back(label);
    }
    return out;
}

} // namespace dapm
