#include "dapm/cli.hpp"

#include "dapm/error.hpp"
#include "dapm/text_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace dapm::cli {

std::vector<DayKind> parse_days(const std::string& list) {
    std::vector<DayKind> out;
    std::string_view rest = list;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        out.push_back(parse_day_kind(item));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ParameterError("day list is empty");
    return out;
}

std::string format_days(const std::vector<DayKind>& days) {
    std::string s;
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (i) s += ',';
        s += to_string(days[i]);
    }
    return s;
}

namespace {

std::pair<int, int> parse_range(const std::string& text) {
    const auto dash = text.find('-', 1);
    if (dash == std::string::npos) {
        const int d = parse_int(text, "calibration.range", 0);
        return {d, d};
    }
    const int a = parse_int(std::string_view(text).substr(0, dash), "calibration.range", 0);
    const int b = parse_int(std::string_view(text).substr(dash + 1), "calibration.range", 0);
    return {a, b};
}

std::string format_range(const std::pair<int, int>& r) {
    return std::to_string(r.first) + "-" + std::to_string(r.second);
}

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParameterError("config key '" + key + "' has the wrong type");
    }
}

using Setter = std::function<void(RunConfig&, const nlohmann::json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"command", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             const auto cmd = get_as<std::string>(v, k);
             if (!c.command.empty() && cmd != c.command) {
                 throw ParameterError("config was written by '" + cmd + "', not '" + c.command + "'");
             }
         }},
        {"seed", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.seed = get_as<std::uint64_t>(v, k);
         }},
        {"out", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.out = get_as<std::string>(v, k);
         }},
        {"method", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.method = parse_method(get_as<std::string>(v, k));
         }},
        {"svg", [](RunConfig& c, const nlohmann::json& v, const std::string& k) { c.svg = get_as<bool>(v, k); }},
        {"scenario.days", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.days = parse_days(get_as<std::string>(v, k));
         }},
        {"scenario.noise_std", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.noise_std = get_as<double>(v, k);
         }},
        {"scenario.n_samples", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.n_samples = get_as<std::size_t>(v, k);
         }},
        {"stft.window", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.stft.window_len = get_as<int>(v, k);
         }},
        {"stft.hop", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.stft.hop = get_as<int>(v, k);
         }},
        {"stft.window_function", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.stft.window = parse_window_function(get_as<std::string>(v, k));
         }},
        {"stft.combinations", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.stft.combinations = parse_channel_combination(get_as<std::string>(v, k));
         }},
        {"align.mu", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.alignment.mu = get_as<double>(v, k);
         }},
        {"align.embed_dim", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.alignment.embed_dim = get_as<Eigen::Index>(v, k);
         }},
        {"align.lambda", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.alignment.lambda = get_as<double>(v, k);
         }},
        {"align.scaling", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.alignment.scaling = parse_feature_scaling(get_as<std::string>(v, k));
         }},
        {"pca.variance", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.pca_variance = get_as<double>(v, k);
         }},
        {"calibration.count", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.calibration_days = get_as<std::size_t>(v, k);
         }},
        {"calibration.mode", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.calibration = parse_calibration_mode(get_as<std::string>(v, k));
         }},
        {"calibration.path", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.calibration_path = get_as<std::string>(v, k);
         }},
        {"calibration.range", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             if (v.is_null()) {
                 c.calibration_range.reset();
             } else {
                 c.calibration_range = parse_range(get_as<std::string>(v, k));
             }
         }},
        {"detect.input", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.input = get_as<std::string>(v, k);
         }},
        {"detect.percentile", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.pipeline.percentile = get_as<double>(v, k);
         }},
        {"roc.percentiles", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.percentiles = get_as<std::vector<double>>(v, k);
         }},
        {"roc.reps", [](RunConfig& c, const nlohmann::json& v, const std::string& k) {
             c.reps = get_as<std::size_t>(v, k);
         }},
    };
    return table;
}

} // namespace

void RunConfig::validate() const {
    if (days.empty()) throw ParameterError("scenario needs at least one day");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ParameterError("noise std must be >= 0");
    pipeline.validate();
    if (reps < 1) throw ParameterError("repetitions must be >= 1");
    if (percentiles.empty()) throw ParameterError("at least one percentile is required");
    for (double q : percentiles) {
        if (!(q > 0.0 && q < 1.0)) throw ParameterError("percentiles must lie in (0, 1)");
    }
    if (calibration_range && calibration_range->first > calibration_range->second) {
        throw ParameterError("calibration range is empty");
    }
    if (command == "roc") {
        const auto bad = std::count(days.begin() + 1, days.end(), DayKind::AnomalousO1);
        if (bad == 0) throw ParameterError("ROC schedule has no anomalous test day");
        if (bad == static_cast<long>(days.size()) - 1) throw ParameterError("ROC schedule has no healthy test day");
    }
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = c.command;
    j["seed"] = c.seed;
    j["out"] = c.out.string();
    j["method"] = to_string(c.method);
    j["svg"] = c.svg;
    j["scenario.days"] = format_days(c.days);
    j["scenario.noise_std"] = c.noise_std;
    j["scenario.n_samples"] = c.pipeline.n_samples;
    j["stft.window"] = c.pipeline.stft.window_len;
    j["stft.hop"] = c.pipeline.stft.hop;
    j["stft.window_function"] = to_string(c.pipeline.stft.window);
    j["stft.combinations"] = to_string(c.pipeline.stft.combinations);
    j["align.mu"] = c.pipeline.alignment.mu;
    j["align.embed_dim"] = c.pipeline.alignment.embed_dim;
    j["align.lambda"] = c.pipeline.alignment.lambda;
    j["align.scaling"] = to_string(c.pipeline.alignment.scaling);
    j["pca.variance"] = c.pipeline.pca_variance;
    j["calibration.count"] = c.pipeline.calibration_days;
    j["calibration.mode"] = to_string(c.pipeline.calibration);
    j["calibration.path"] = c.calibration_path.string();
    j["calibration.range"] = c.calibration_range ? nlohmann::json(format_range(*c.calibration_range)) : nlohmann::json();
    j["detect.input"] = c.input.string();
    j["detect.percentile"] = c.pipeline.percentile;
    j["roc.percentiles"] = c.percentiles;
    j["roc.reps"] = c.reps;
    return j;
}

void apply_json(RunConfig& config, const nlohmann::json& flat) {
    if (!flat.is_object()) throw ParameterError("config must be a JSON object");
    for (const auto& [key, value] : flat.items()) {
        if (key.rfind("manifest.", 0) == 0) continue;
        const auto it = setters().find(key);
        if (it == setters().end()) throw ParameterError("unknown config key '" + key + "'");
        it->second(config, value, key);
    }
}

namespace {

// --- SVG --------------------------------------------------------------------------------

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string colour;
};

std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, std::optional<double> hline, bool unit_square) {
    const double w = 640, h = 400, l = 70, r = 20, t = 40, b = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!unit_square) {
        x0 = y0 = INFINITY;
        x1 = y1 = -INFINITY;
        for (const auto& s : series) {
            for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
            for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
        }
        if (hline) y0 = std::min(y0, *hline), y1 = std::max(y1, *hline);
        y0 = std::min(y0, 0.0);
        if (!(x1 > x0)) x1 = x0 + 1;
        if (!(y1 > y0)) y1 = y0 + 1;
        y1 += 0.05 * (y1 - y0);
    }
    const auto px = [&](double v) { return l + (v - x0) / (x1 - x0) * (w - l - r); };
    const auto py = [&](double v) { return h - b - (v - y0) / (y1 - y0) * (h - t - b); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    s << "<line x1=\"" << l << "\" y1=\"" << h - b << "\" x2=\"" << w - r << "\" y2=\"" << h - b
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        s << "<text x=\"" << px(xv) << "\" y=\"" << h - b + 16 << "\" text-anchor=\"middle\">" << format_double(
                 std::round(xv * 1000) / 1000) << "</text>\n";
        s << "<text x=\"" << l - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
          << format_double(std::round(yv * 1e4) / 1e4) << "</text>\n";
    }
    s << "<text x=\"" << (l + w - r) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
    s << "<text x=\"16\" y=\"" << (t + h - b) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (t + h - b) / 2 << ")\">" << ylabel << "</text>\n";
    if (unit_square) {
        s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
          << "\" stroke=\"grey\" stroke-dasharray=\"4 4\"/>\n";
    }
    if (hline) {
        s << "<line x1=\"" << l << "\" y1=\"" << py(*hline) << "\" x2=\"" << w - r << "\" y2=\"" << py(*hline)
          << "\" stroke=\"red\" stroke-dasharray=\"6 3\"/>\n";
    }
    double legend_y = t + 6;
    for (const auto& ser : series) {
        s << "<polyline fill=\"none\" stroke=\"" << ser.colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < ser.x.size(); ++i) s << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
        s << "\"/>\n";
        for (std::size_t i = 0; i < ser.x.size(); ++i) {
            s << "<circle cx=\"" << px(ser.x[i]) << "\" cy=\"" << py(ser.y[i]) << "\" r=\"3\" fill=\"" << ser.colour
              << "\"/>\n";
        }
        s << "<text x=\"" << w - r - 90 << "\" y=\"" << legend_y + 10 << "\" fill=\"" << ser.colour << "\">"
          << ser.name << "</text>\n";
        legend_y += 16;
    }
    s << "</svg>\n";
    return s.str();
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    LineReader lines(text);
    std::string_view line;
    std::size_t row = 0;
    std::vector<std::vector<std::string>> out;
    bool header = true;
    while (lines.next(line, row)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        for (auto c : split_csv_line(line)) cells.emplace_back(c);
        out.push_back(std::move(cells));
    }
    return out;
}

void plot_distances(const std::filesystem::path& csv, const std::filesystem::path& svg) {
    Series s{"distance", {}, {}, "steelblue"};
    std::optional<double> threshold;
    std::string method;
    std::size_t row = 1;
    for (const auto& cells : read_table(csv)) {
        ++row;
        if (cells.size() != 5) throw FormatError("expected 5 columns", row);
        s.x.push_back(parse_int(cells[0], "day", row));
        s.y.push_back(parse_double(cells[2], "distance", row));
        threshold = parse_double(cells[3], "threshold", row);
        method = cells[1];
    }
    write_text_file(svg, svg_chart("Distance to day 1 (" + method + ")", "day", "distance", {s}, threshold, false));
}

void plot_roc(const std::filesystem::path& csv, const std::filesystem::path& svg) {
    std::map<std::string, Series> by_method;
    std::size_t row = 1;
    for (const auto& cells : read_table(csv)) {
        ++row;
        if (cells.size() != 4) throw FormatError("expected 4 columns", row);
        auto& s = by_method[cells[0]];
        s.name = cells[0];
        s.colour = cells[0] == "pca" ? "darkorange" : "steelblue";
        s.x.push_back(parse_double(cells[2], "fpr", row));
        s.y.push_back(parse_double(cells[3], "tpr", row));
    }
    std::vector<Series> series;
    for (auto& [_, s] : by_method) series.push_back(std::move(s));
    write_text_file(svg, svg_chart("ROC", "false positive rate", "true positive rate", series, std::nullopt, true));
}

// --- commands ---------------------------------------------------------------------------

void write_manifest(const RunConfig& c, nlohmann::json extra) {
    nlohmann::json j = to_json(c);
    for (auto& [k, v] : extra.items()) j["manifest." + k] = v;
    write_text_file(c.out / "run_manifest.json", j.dump(2) + "\n");
}

ScenarioSchedule schedule_of(const RunConfig& c) {
    ScenarioSchedule s;
    s.days = c.days;
    s.seed = c.seed;
    s.noise_std = c.noise_std;
    return s;
}

void cmd_generate(const RunConfig& c, std::ostream& out) {
    const auto schedule = schedule_of(c);
    const auto days = generate_scenario(schedule, c.pipeline.n_samples);
    const auto cal = calibration_traces(schedule, c.pipeline);

    std::vector<SignalTrace> traces;
    for (const auto& d : days) traces.push_back(d.trace);
    write_csv(traces, c.out / "dataset.csv");
    write_labels(days, c.out / "labels.csv");
    std::vector<SignalTrace> cal_traces;
    for (const auto& d : cal) cal_traces.push_back(d.trace);
    write_csv(cal_traces, c.out / "calibration.csv");
    write_labels(cal, c.out / "calibration_labels.csv");
    write_manifest(c, {{"days_written", days.size()}, {"calibration_days_written", cal.size()}});
    out << "wrote " << days.size() << " days to " << (c.out / "dataset.csv").string() << "\n";
}

std::vector<FeatureMatrix> features_of(const std::vector<SignalTrace>& traces, const StftConfig& stft) {
    std::vector<FeatureMatrix> f;
    for (const auto& t : traces) {
        if (static_cast<Eigen::Index>(t.motion_length()) < stft.window_len) {
            throw FormatError("day " + std::to_string(t.day) + " is shorter than the STFT window");
        }
        f.push_back(trace_features(t, stft));
    }
    return f;
}

void cmd_detect(const RunConfig& c, std::ostream& out) {
    const auto input = c.input.empty() ? c.out / "dataset.csv" : c.input;
    auto traces = read_csv(input);
    if (traces.size() < 2) throw FormatError("dataset needs a training day and at least one test day");
    std::sort(traces.begin(), traces.end(), [](const auto& a, const auto& b) { return a.day < b.day; });

    std::vector<int> numbers;
    for (const auto& t : traces) numbers.push_back(t.day);
    const auto days = features_of(traces, c.pipeline.stft);

    std::vector<FeatureMatrix> cal;
    std::string cal_source;
    if (c.calibration_range) {
        for (std::size_t i = 0; i < traces.size(); ++i) {
            if (numbers[i] >= c.calibration_range->first && numbers[i] <= c.calibration_range->second) {
                cal.push_back(days[i]);
            }
        }
        if (cal.empty()) throw FormatError("calibration range " + format_range(*c.calibration_range) +
                                           " selects no day of the dataset");
        cal_source = "days " + format_range(*c.calibration_range);
    } else {
        const auto path = c.calibration_path.empty() ? input.parent_path() / "calibration.csv" : c.calibration_path;
        if (!std::filesystem::exists(path)) {
            throw IoError("calibration file " + path.string() +
                          " not found; pass --calibration PATH or --calibration-days A-B");
        }
        cal = features_of(read_csv(path), c.pipeline.stft);
        cal_source = path.string();
    }

    std::vector<bool> labels;
    const auto labels_path = input.parent_path() / "labels.csv";
    if (std::filesystem::exists(labels_path)) {
        std::map<int, bool> by_day;
        for (const auto& l : read_labels(labels_path)) by_day[l.day] = l.anomalous;
        bool complete = true;
        for (int d : numbers) complete = complete && by_day.count(d);
        if (complete) {
            for (int d : numbers) labels.push_back(by_day[d]);
        }
    }

    const auto report = detect_days(days, cal, c.method, c.pipeline, numbers, labels);
    write_text_file(c.out / "report.json", to_json(report).dump(2) + "\n");
    write_distance_csv(report, c.out / "distances.csv");
    if (c.svg) plot_distances(c.out / "distances.csv", c.out / "distances.svg");
    write_manifest(c, {{"calibration_source", cal_source}, {"input", input.string()}});

    for (const auto& d : report.days) {
        out << "day " << d.day << "  " << to_string(d.method) << "  distance " << format_double(d.distance)
            << "  threshold " << format_double(d.threshold) << "  " << to_string(d.verdict) << "\n";
    }
}

void cmd_roc(const RunConfig& c, std::ostream& out) {
    const auto roc = roc_experiment(schedule_of(c), c.percentiles, c.reps, c.pipeline);
    write_roc_csv(roc, c.out / "roc.csv");
    if (c.svg) plot_roc(c.out / "roc.csv", c.out / "roc.svg");
    write_manifest(c, {{"averaged", roc.repetitions > 1},
                       {"repetitions", roc.repetitions},
                       {"repetition_seeds", roc.seeds}});
    out << "method  percentile  fpr  tpr\n";
    for (const auto& p : roc.points) {
        out << to_string(p.method) << "  " << format_double(p.percentile) << "  " << format_double(p.fpr) << "  "
            << format_double(p.tpr) << "\n";
    }
    if (roc.repetitions == 1) out << "note: single repetition, values are not averaged\n";
}

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> method;
    std::optional<double> mu;
    std::optional<Eigen::Index> embed_dim;
    std::optional<double> lambda;
    std::optional<std::string> scaling;
    std::optional<int> window;
    std::optional<int> hop;
    std::optional<std::string> window_fn;
    std::optional<std::string> combinations;
    std::optional<std::string> percentiles;
    std::optional<double> percentile;
    std::optional<std::size_t> reps;
    bool svg = false;
    std::optional<std::string> days;
    std::optional<double> noise_std;
    std::optional<std::size_t> samples;
    std::optional<std::size_t> calibration_count;
    std::optional<std::string> calibration_mode;
    std::optional<std::string> calibration;
    std::optional<std::string> calibration_days;
    std::optional<std::string> input;
};

void add_shared(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "flat JSON config (e.g. a previous run_manifest.json)");
    app.add_option("--seed", f.seed, "base random seed");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--method", f.method, "pca | align");
    app.add_option("--mu", f.mu, "alignment weight of the correspondence term, in [0, 1]");
    app.add_option("--embed-dim", f.embed_dim, "upper bound of the embedding dimension");
    app.add_option("--lambda", f.lambda, "nuclear-norm weight of the reconstruction");
    app.add_option("--scaling", f.scaling, "feature scaling before alignment: none | center | standardize");
    app.add_option("--window", f.window, "STFT window length in samples");
    app.add_option("--hop", f.hop, "STFT hop in samples");
    app.add_option("--window-fn", f.window_fn, "hann | rectangular");
    app.add_option("--combinations", f.combinations, "none | pairwise_products");
    app.add_option("--percentiles", f.percentiles, "comma-separated list in (0, 1)");
    app.add_option("--reps", f.reps, "ROC repetitions");
    app.add_flag("--svg", f.svg, "also write SVG plots");
    app.add_option("--days", f.days, "schedule, e.g. O1,O1,A_O1,O2");
    app.add_option("--noise-std", f.noise_std, "additive noise standard deviation");
    app.add_option("--samples", f.samples, "samples per day");
    app.add_option("--calibration-count", f.calibration_count, "number of synthetic calibration days");
    app.add_option("--calibration-mode", f.calibration_mode, "healthy_mix | o1");
}

std::vector<double> parse_percentiles(const std::string& text) {
    std::vector<double> out;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(parse_double(rest.substr(0, comma), "percentiles", 0));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

RunConfig resolve(const std::string& command, const Flags& f) {
    RunConfig c;
    c.command = command;
    if (!f.config.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text_file(f.config));
        } catch (const nlohmann::json::exception& e) {
            throw ParameterError("config " + f.config + ": " + e.what());
        } catch (const IoError& e) {
            throw ParameterError(e.what());
        }
        apply_json(c, j);
    }
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.out = *f.out;
    if (f.method) c.method = parse_method(*f.method);
    if (f.mu) c.pipeline.alignment.mu = *f.mu;
    if (f.embed_dim) c.pipeline.alignment.embed_dim = *f.embed_dim;
    if (f.lambda) c.pipeline.alignment.lambda = *f.lambda;
    if (f.scaling) c.pipeline.alignment.scaling = parse_feature_scaling(*f.scaling);
    if (f.window) c.pipeline.stft.window_len = *f.window;
    if (f.hop) c.pipeline.stft.hop = *f.hop;
    if (f.window_fn) c.pipeline.stft.window = parse_window_function(*f.window_fn);
    if (f.combinations) c.pipeline.stft.combinations = parse_channel_combination(*f.combinations);
    if (f.percentiles) c.percentiles = parse_percentiles(*f.percentiles);
    if (f.percentile) c.pipeline.percentile = *f.percentile;
    if (f.reps) c.reps = *f.reps;
    if (f.svg) c.svg = true;
    if (f.days) c.days = parse_days(*f.days);
    if (f.noise_std) c.noise_std = *f.noise_std;
    if (f.samples) c.pipeline.n_samples = *f.samples;
    if (f.calibration_count) c.pipeline.calibration_days = *f.calibration_count;
    if (f.calibration_mode) c.pipeline.calibration = parse_calibration_mode(*f.calibration_mode);
    if (f.calibration) c.calibration_path = *f.calibration;
    if (f.calibration_days) c.calibration_range = parse_range(*f.calibration_days);
    if (f.input) c.input = *f.input;
    c.validate();
    return c;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Operation-invariant anomaly detection for robot axis signals"};
    app.require_subcommand(1);
    Flags f;
    auto* gen = app.add_subcommand("generate", "write a synthetic scenario dataset with labels");
    auto* det = app.add_subcommand("detect", "score every day of a dataset against its first day");
    auto* roc = app.add_subcommand("roc", "averaged ROC of both detectors over repeated scenarios");
    for (auto* sub : {gen, det, roc}) add_shared(*sub, f);
    det->add_option("--input", f.input, "dataset CSV (default <out>/dataset.csv)");
    det->add_option("--calibration", f.calibration, "calibration dataset CSV (default next to the input)");
    det->add_option("--calibration-days", f.calibration_days, "use days A-B of the input for calibration");
    det->add_option("--percentile", f.percentile, "threshold percentile in (0, 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig config;
    try {
        config = resolve(command, f);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (command == "generate") cmd_generate(config, out);
        else if (command == "detect") cmd_detect(config, out);
        else cmd_roc(config, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

} // namespace dapm::cli
