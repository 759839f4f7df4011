#pragma once

// Command-line front end: `generate`, `detect` and `roc`.

#include "dapm/detect.hpp"
#include "dapm/signals.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dapm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;

/// Fully resolved run settings. Serialised as a flat JSON object with dotted keys.
struct RunConfig {
    std::string command;
    std::uint64_t seed = 7;
    std::filesystem::path out = "out";
    Method method = Method::align;
    std::vector<DayKind> days = ScenarioSchedule::reference(0).days;
    double noise_std = kDefaultNoiseStd;
    PipelineConfig pipeline;
    std::filesystem::path input;             ///< detect: dataset CSV (default <out>/dataset.csv)
    std::filesystem::path calibration_path;  ///< detect: calibration CSV (default next to input)
    std::optional<std::pair<int, int>> calibration_range; ///< detect: inclusive day range of the input
    std::vector<double> percentiles{std::begin(kReferencePercentiles), std::end(kReferencePercentiles)};
    std::size_t reps = 10;
    bool svg = false;

    /// Throws ParameterError on the first violated precondition.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Overlays the keys of a flat config object. Unknown keys and ill-typed values throw
/// ParameterError; keys under `manifest.` are informational and ignored.
void apply_json(RunConfig& config, const nlohmann::json& flat);

/// "O1,A_O1,O2" -> kinds.
std::vector<DayKind> parse_days(const std::string& list);
std::string format_days(const std::vector<DayKind>& days);

/// Runs the tool. Returns 0 on success, 1 for configuration errors, 2 for I/O or data errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dapm::cli
