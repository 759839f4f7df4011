#pragma once

// Threshold calibration, per-day classification and the ROC experiment.

#include "dapm/alignment.hpp"
#include "dapm/baseline.hpp"
#include "dapm/features.hpp"
#include "dapm/signals.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dapm {

/// Half-Laplace (location 0) model of healthy distances: CDF 1 - exp(-x / scale).
struct HalfLaplaceModel {
    double scale = 1.0;
    std::size_t n_calibration = 0;
};

/// Maximum-likelihood fit, scale = mean. Throws ParameterError for empty or negative input
/// and for an all-zero sample.
HalfLaplaceModel fit_half_laplace(std::span<const double> deltas);

/// -scale * ln(1 - q). Throws ParameterError unless 0 < q < 1 and scale > 0.
double quantile_threshold(const HalfLaplaceModel& model, double q);

/// Anomalous iff delta > epsilon; a distance equal to the threshold is healthy.
Verdict classify(double delta, double epsilon) noexcept;

enum class Method { pca, align };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view text);

/// Which healthy days make up the synthetic calibration set.
enum class CalibrationMode {
    healthy_mix, ///< round-robin over the healthy operations present in the schedule
    o1,          ///< O1 only
};

std::string_view to_string(CalibrationMode m) noexcept;
CalibrationMode parse_calibration_mode(std::string_view text);

struct PipelineConfig {
    StftConfig stft;
    AlignmentConfig alignment;
    double pca_variance = 0.95;
    std::size_t calibration_days = 20;
    CalibrationMode calibration = CalibrationMode::healthy_mix;
    std::size_t n_samples = kDefaultDaySamples;
    double percentile = 0.95;

    void validate() const;
};

/// Scores test days against one fixed training day.
class DayScorer {
public:
    DayScorer(FeatureMatrix training, Method method, const PipelineConfig& config);

    double score(const FeatureMatrix& test) const;
    Method method() const noexcept { return method_; }

private:
    FeatureMatrix training_;
    Method method_;
    AlignmentConfig alignment_;
    PcaModel pca_;
};

struct DayRecord {
    int day = 0;
    Method method = Method::align;
    double distance = 0.0;
    double threshold = 0.0;
    Verdict verdict = Verdict::healthy;
    std::optional<bool> ground_truth;
};

struct DetectionReport {
    Method method = Method::align;
    double percentile = 0.95;
    HalfLaplaceModel model;
    int training_day = 1;
    std::vector<DayRecord> days; ///< test days only
    std::optional<double> tpr;   ///< absent without labeled positives
    std::optional<double> fpr;   ///< absent without labeled negatives
};

nlohmann::json to_json(const DetectionReport& report);

/// `day,method,distance,threshold,verdict` for each test day.
void write_distance_csv(const DetectionReport& report, const std::filesystem::path& path);

/// Scores `days[1..]` against `days[0]`, calibrates on `calibration` and classifies.
/// `labels`, when non-empty, must match `days` and fills ground truth and the rates.
DetectionReport detect_days(std::span<const FeatureMatrix> days, std::span<const FeatureMatrix> calibration,
                            Method method, const PipelineConfig& config, const std::vector<int>& day_numbers = {},
                            const std::vector<bool>& labels = {});

FeatureMatrix trace_features(const SignalTrace& trace, const StftConfig& config);

/// The synthetic healthy days used for calibration, seeded independently of the scenario.
std::vector<LabeledTrace> calibration_traces(const ScenarioSchedule& schedule, const PipelineConfig& config);

/// Generates the scenario and calibration days, trains on day 1 and classifies the rest.
DetectionReport run_scenario(const ScenarioSchedule& schedule, Method method, const PipelineConfig& config);

struct RocPoint {
    Method method = Method::align;
    double percentile = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points; ///< pca rows first, then align, percentiles in input order
    std::size_t repetitions = 0;
    std::vector<std::uint64_t> seeds; ///< scenario seed of each repetition
};

/// Seed of repetition r derived from the schedule seed.
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t repetition) noexcept;

/// Averages FPR and TPR over `repetitions` fresh scenarios for both detectors.
/// Throws ParameterError when the schedule has no anomalous or no healthy test day.
RocResult roc_experiment(const ScenarioSchedule& schedule, std::span<const double> percentiles,
                         std::size_t repetitions, const PipelineConfig& config);

/// Header `method,percentile,fpr,tpr`.
void write_roc_csv(const RocResult& roc, const std::filesystem::path& path);

inline constexpr double kReferencePercentiles[] = {0.5, 0.75, 0.9, 0.95, 0.975, 0.99};

} // namespace dapm
