#include "dapm/detect.hpp"

#include "dapm/error.hpp"
#include "dapm/preprocess.hpp"
#include "dapm/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dapm {

HalfLaplaceModel fit_half_laplace(std::span<const double> deltas) {
    if (deltas.empty()) {
        throw ParameterError("half-Laplace fit needs at least one distance");
    }
    double sum = 0.0;
    for (double d : deltas) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw ParameterError("calibration distances must be finite and non-negative");
        }
        sum += d;
    }
    const double scale = sum / static_cast<double>(deltas.size());
    if (!(scale > 0.0)) {
        throw ParameterError("calibration distances are all zero; the scale is degenerate");
    }
    return {scale, deltas.size()};
}

double quantile_threshold(const HalfLaplaceModel& model, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw ParameterError("percentile must lie in (0, 1)");
    }
    if (!(model.scale > 0.0)) {
        throw ParameterError("half-Laplace scale must be > 0");
    }
    return -model.scale * std::log1p(-q);
}

Verdict classify(double delta, double epsilon) noexcept {
    return delta > epsilon ? Verdict::anomalous : Verdict::healthy;
}

std::string_view to_string(Method m) noexcept {
    return m == Method::pca ? "pca" : "align";
}

Method parse_method(std::string_view text) {
    if (text == "pca") return Method::pca;
    if (text == "align") return Method::align;
    throw ParameterError("unknown method '" + std::string(text) + "' (pca|align)");
}

std::string_view to_string(CalibrationMode m) noexcept {
    return m == CalibrationMode::o1 ? "o1" : "healthy_mix";
}

CalibrationMode parse_calibration_mode(std::string_view text) {
    if (text == "healthy_mix") return CalibrationMode::healthy_mix;
    if (text == "o1") return CalibrationMode::o1;
    throw ParameterError("unknown calibration mode '" + std::string(text) + "' (healthy_mix|o1)");
}

void PipelineConfig::validate() const {
    stft.validate(static_cast<Eigen::Index>(n_samples));
    alignment.validate();
    if (!(pca_variance > 0.0 && pca_variance <= 1.0)) {
        throw ParameterError("pca variance fraction must lie in (0, 1]");
    }
    if (calibration_days < 1) {
        throw ParameterError("at least one calibration day is required");
    }
    if (!(percentile > 0.0 && percentile < 1.0)) {
        throw ParameterError("percentile must lie in (0, 1)");
    }
}

DayScorer::DayScorer(FeatureMatrix training, Method method, const PipelineConfig& config)
    : training_(std::move(training)), method_(method), alignment_(config.alignment) {
    if (training_.frames() == 0) {
        throw ParameterError("training day has no complete STFT frame");
    }
    if (method_ == Method::pca) {
        const Eigen::Index p = components_for_variance(training_.data, config.pca_variance);
        pca_ = fit_pca(training_.data, p);
    }
}

double DayScorer::score(const FeatureMatrix& test) const {
    if (test.features() != training_.features()) {
        throw ParameterError("feature count mismatch: training " + std::to_string(training_.features()) +
                             ", test " + std::to_string(test.features()));
    }
    if (method_ == Method::pca) {
        return pca_distance(training_.data, test.data, pca_);
    }
    return aligned_score(training_.data, test.data, alignment_).distance;
}

nlohmann::json to_json(const DetectionReport& report) {
    nlohmann::json j;
    j["method"] = to_string(report.method);
    j["percentile"] = report.percentile;
    j["training_day"] = report.training_day;
    j["calibration"] = {{"scale", report.model.scale}, {"n_calibration", report.model.n_calibration}};
    auto& days = j["days"] = nlohmann::json::array();
    for (const auto& d : report.days) {
        nlohmann::json row{{"day", d.day},
                           {"method", to_string(d.method)},
                           {"distance", d.distance},
                           {"threshold", d.threshold},
                           {"verdict", to_string(d.verdict)}};
        if (d.ground_truth) row["ground_truth"] = *d.ground_truth ? "anomalous" : "healthy";
        days.push_back(std::move(row));
    }
    auto& summary = j["summary"];
    summary["percentile"] = report.percentile;
    summary["tpr"] = report.tpr ? nlohmann::json(*report.tpr) : nlohmann::json(nullptr);
    summary["fpr"] = report.fpr ? nlohmann::json(*report.fpr) : nlohmann::json(nullptr);
    return j;
}

void write_distance_csv(const DetectionReport& report, const std::filesystem::path& path) {
    std::string out = "day,method,distance,threshold,verdict\n";
    for (const auto& d : report.days) {
        out += std::to_string(d.day) + ',' + std::string(to_string(d.method)) + ',' + format_double(d.distance) +
               ',' + format_double(d.threshold) + ',' + std::string(to_string(d.verdict)) + '\n';
    }
    write_text_file(path, out);
}

DetectionReport detect_days(std::span<const FeatureMatrix> days, std::span<const FeatureMatrix> calibration,
                            Method method, const PipelineConfig& config, const std::vector<int>& day_numbers,
                            const std::vector<bool>& labels) {
    if (days.size() < 2) {
        throw ParameterError("need a training day and at least one test day");
    }
    if (!day_numbers.empty() && day_numbers.size() != days.size()) {
        throw ParameterError("day numbers do not match the number of days");
    }
    if (!labels.empty() && labels.size() != days.size()) {
        throw ParameterError("labels do not match the number of days");
    }
    const DayScorer scorer(days[0], method, config);

    std::vector<double> cal;
    cal.reserve(calibration.size());
    for (const auto& c : calibration) cal.push_back(scorer.score(c));

    DetectionReport report;
    report.method = method;
    report.percentile = config.percentile;
    report.model = fit_half_laplace(cal);
    report.training_day = day_numbers.empty() ? 1 : day_numbers[0];
    const double eps = quantile_threshold(report.model, config.percentile);

    std::size_t pos = 0, neg = 0, tp = 0, fp = 0;
    for (std::size_t i = 1; i < days.size(); ++i) {
        DayRecord r;
        r.day = day_numbers.empty() ? static_cast<int>(i + 1) : day_numbers[i];
        r.method = method;
        r.distance = scorer.score(days[i]);
        r.threshold = eps;
        r.verdict = classify(r.distance, eps);
        if (!labels.empty()) {
            r.ground_truth = labels[i];
            const bool flagged = r.verdict == Verdict::anomalous;
            if (labels[i]) {
                ++pos;
                tp += flagged;
            } else {
                ++neg;
                fp += flagged;
            }
        }
        report.days.push_back(r);
    }
    if (pos) report.tpr = static_cast<double>(tp) / static_cast<double>(pos);
    if (neg) report.fpr = static_cast<double>(fp) / static_cast<double>(neg);
    return report;
}

FeatureMatrix trace_features(const SignalTrace& trace, const StftConfig& config) {
    return feature_matrix(assemble(trace), config);
}

std::vector<LabeledTrace> calibration_traces(const ScenarioSchedule& schedule, const PipelineConfig& config) {
    std::vector<DayKind> kinds;
    if (config.calibration == CalibrationMode::healthy_mix) {
        for (DayKind k : schedule.days) {
            if (k != DayKind::AnomalousO1 && std::find(kinds.begin(), kinds.end(), k) == kinds.end()) {
                kinds.push_back(k);
            }
        }
    }
    if (kinds.empty()) kinds.push_back(DayKind::O1);

    ScenarioSchedule cal;
    cal.seed = day_seed(schedule.seed, 0xCA11B8A7E0000000ULL);
    cal.noise_std = schedule.noise_std;
    for (std::size_t i = 0; i < config.calibration_days; ++i) cal.days.push_back(kinds[i % kinds.size()]);
    return generate_scenario(cal, config.n_samples);
}

namespace {

struct ScenarioFeatures {
    std::vector<FeatureMatrix> days;
    std::vector<FeatureMatrix> calibration;
    std::vector<int> numbers;
    std::vector<bool> labels;
};

ScenarioFeatures build_features(const ScenarioSchedule& schedule, const PipelineConfig& config) {
    ScenarioFeatures f;
    for (const auto& d : generate_scenario(schedule, config.n_samples)) {
        f.days.push_back(trace_features(d.trace, config.stft));
        f.numbers.push_back(d.trace.day);
        f.labels.push_back(d.anomalous);
    }
    for (const auto& d : calibration_traces(schedule, config)) {
        f.calibration.push_back(trace_features(d.trace, config.stft));
    }
    return f;
}

} // namespace

DetectionReport run_scenario(const ScenarioSchedule& schedule, Method method, const PipelineConfig& config) {
    config.validate();
    const auto f = build_features(schedule, config);
    return detect_days(f.days, f.calibration, method, config, f.numbers, f.labels);
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t repetition) noexcept {
    return day_seed(seed, 0x5EED000000000000ULL + repetition);
}

RocResult roc_experiment(const ScenarioSchedule& schedule, std::span<const double> percentiles,
                         std::size_t repetitions, const PipelineConfig& config) {
    config.validate();
    if (repetitions < 1) throw ParameterError("repetitions must be >= 1");
    if (percentiles.empty()) throw ParameterError("at least one percentile is required");
    for (double q : percentiles) {
        if (!(q > 0.0 && q < 1.0)) throw ParameterError("percentiles must lie in (0, 1)");
    }
    std::size_t positives = 0, negatives = 0;
    for (std::size_t i = 1; i < schedule.days.size(); ++i) {
        (schedule.days[i] == DayKind::AnomalousO1 ? positives : negatives) += 1;
    }
    if (positives == 0) throw ParameterError("schedule has no anomalous test day; TPR is undefined");
    if (negatives == 0) throw ParameterError("schedule has no healthy test day; FPR is undefined");

    const Method methods[] = {Method::pca, Method::align};
    const std::size_t nq = percentiles.size();
    std::vector<double> fpr(2 * nq, 0.0), tpr(2 * nq, 0.0);

    RocResult out;
    out.repetitions = repetitions;
    for (std::size_t r = 0; r < repetitions; ++r) {
        ScenarioSchedule s = schedule;
        s.seed = repetition_seed(schedule.seed, r);
        out.seeds.push_back(s.seed);
        const auto f = build_features(s, config);
        for (std::size_t m = 0; m < 2; ++m) {
            const DayScorer scorer(f.days[0], methods[m], config);
            std::vector<double> cal;
            for (const auto& c : f.calibration) cal.push_back(scorer.score(c));
            const auto model = fit_half_laplace(cal);
            std::vector<double> scores;
            for (std::size_t i = 1; i < f.days.size(); ++i) scores.push_back(scorer.score(f.days[i]));
            for (std::size_t qi = 0; qi < nq; ++qi) {
                const double eps = quantile_threshold(model, percentiles[qi]);
                std::size_t tp = 0, fp = 0;
                for (std::size_t i = 1; i < f.days.size(); ++i) {
                    if (classify(scores[i - 1], eps) != Verdict::anomalous) continue;
                    (f.labels[i] ? tp : fp) += 1;
                }
                tpr[m * nq + qi] += static_cast<double>(tp) / static_cast<double>(positives);
                fpr[m * nq + qi] += static_cast<double>(fp) / static_cast<double>(negatives);
            }
        }
    }
    const double reps = static_cast<double>(repetitions);
    for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t qi = 0; qi < nq; ++qi) {
            out.points.push_back({methods[m], percentiles[qi], fpr[m * nq + qi] / reps, tpr[m * nq + qi] / reps});
        }
    }
    return out;
}

void write_roc_csv(const RocResult& roc, const std::filesystem::path& path) {
    std::string out = "method,percentile,fpr,tpr\n";
    for (const auto& p : roc.points) {
        out += std::string(to_string(p.method)) + ',' + format_double(p.percentile) + ',' + format_double(p.fpr) +
               ',' + format_double(p.tpr) + '\n';
    }
    write_text_file(path, out);
}

} // namespace dapm
