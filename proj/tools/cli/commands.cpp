#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include "ambrosia/ambrosia.hpp"

namespace ambrosia::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct OutputFile {
    std::string name;
    std::string contents;
};

// What a subcommand produced. Nothing touches the filesystem until the whole
// computation has succeeded.
struct Result {
    std::vector<OutputFile> files;
    std::string stdout_text;
    std::string stderr_text;
    json config = json::object();
    json input = nullptr;
    std::optional<std::uint64_t> seed;
};

struct InputOptions {
    std::string path;
    std::string column = "value";
    std::string gen;
};

struct ForecastOptions {
    std::string kind = "window";
    std::size_t window = 5;
    std::size_t ar_order = 3;
    std::size_t fit_window = 50;
    std::size_t refit_every = 0;
};

struct ForestOptions {
    std::size_t trees = 40;
    std::size_t tree_size = 256;
    std::size_t shingle = 4;
    std::uint64_t seed = 0;
};

struct SimulateOptions {
    InputOptions input;
    ForecastOptions forecast;
    double delta = 0.5;
    bool dump_frames = false;
};

struct SweepOptions {
    InputOptions input;
    ForecastOptions forecast;
    std::vector<double> deltas{0.0, 0.4, 0.8, 1.2};
    std::vector<std::string> forecasters{"window", "arima"};
    std::string format = "csv";
};

struct AnomalyOptions {
    InputOptions input;
    ForecastOptions forecast;
    ForestOptions forest;
    std::vector<double> deltas{0.5, 2.0};
    double threshold = 50.0;
    std::optional<std::size_t> tolerance;
};

struct LifetimeOptions {
    std::string tech = "lora";
    std::vector<double> tis{3600.0};
    std::vector<double> fractions{1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
    double battery = 13500.0;
    double payload = 1000.0;
    std::optional<double> rate;
    double overhead = 0.0;
};

struct CompareOptions {
    ForecastOptions forecast;
    std::vector<std::size_t> ns{1000, 10000, 100000};
    std::size_t reps = 5;
    std::uint64_t seed = 1;
};

struct DisplacementOptions {
    InputOptions input;
    ForecastOptions forecast;
    std::vector<double> deltas{0.3, 0.5, 1.0};
};

struct ReplayOptions {
    std::string manifest;
};

void add_input_flags(CLI::App& cmd, InputOptions& o) {
    cmd.add_option("--input", o.path, "CSV file with a header row; columns timestamp,value or index,value");
    cmd.add_option("--column", o.column, "Name of the value column")->capture_default_str();
    cmd.add_option("--gen", o.gen,
                   "Synthetic stream instead of --input: kind:length[,key=value...] with kind in "
                   "constant|linear|sinusoid|ar1|random_walk and keys level, slope, intercept, amplitude, "
                   "period, phi, noise, seed, dt, spike=INDEX@MAGNITUDE");
}

void add_forecast_flags(CLI::App& cmd, ForecastOptions& o) {
    cmd.add_option("--forecaster", o.kind,
                   "Predictor run identically at sensor and server: window (current sample plus the mean of "
                   "the last w differences) or arima (AR(p) on first differences, q = 0)")
        ->capture_default_str();
    cmd.add_option("--window", o.window, "Window size w; the first w+1 samples are always sent")
        ->capture_default_str();
    cmd.add_option("--ar-order", o.ar_order, "AR order p of the ARIMA(p,1,0) baseline")->capture_default_str();
    cmd.add_option("--fit-window", o.fit_window,
                   "Leading samples used to fit the ARIMA coefficients (always sent)")
        ->capture_default_str();
    cmd.add_option("--refit-every", o.refit_every, "Refit ARIMA every N samples on the trailing fit window (0 = never)")
        ->capture_default_str();
}

void add_forest_flags(CLI::App& cmd, ForestOptions& o) {
    cmd.add_option("--trees", o.trees, "Random cut trees in the forest")->capture_default_str();
    cmd.add_option("--tree-size", o.tree_size, "Points kept per tree (oldest evicted first)")->capture_default_str();
    cmd.add_option("--shingle", o.shingle, "Shingle length turning the scalar stream into points")
        ->capture_default_str();
    cmd.add_option("--seed", o.seed, "Forest seed")->capture_default_str();
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        out.push_back(item);
    }
    return out;
}

double to_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("invalid number '" + text + "' for " + what);
    }
}

std::uint64_t to_u64(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size() || text.starts_with('-')) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::logic_error&) {
        throw ValidationError("invalid integer '" + text + "' for " + what);
    }
}

struct LoadedInput {
    TimeSeries series;
    json description;
};

LoadedInput load_input(const InputOptions& o) {
    if (o.path.empty() == o.gen.empty()) {
        throw ValidationError("exactly one of --input or --gen is required");
    }
    if (!o.gen.empty()) {
        return {generate(parse_gen_spec(o.gen)),
                json{{"source", "generator"}, {"spec", o.gen}, {"digest", digest(o.gen)}}};
    }
    std::ifstream in(o.path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open '" + o.path + "'");
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream text(bytes);
    return {parse_csv(text, o.column),
            json{{"source", "file"}, {"path", o.path}, {"column", o.column}, {"digest", digest(bytes)}}};
}

ProtocolConfig protocol_config(const ForecastOptions& o, double delta) {
    ProtocolConfig c;
    c.delta = delta;
    c.forecaster.kind = parse_forecaster_kind(o.kind);
    c.forecaster.window = o.window;
    c.forecaster.ar_order = o.ar_order;
    c.forecaster.fit_window = o.fit_window;
    c.forecaster.refit_every = o.refit_every;
    validate(c);
    return c;
}

json forecast_json(const ForecastOptions& o) {
    return json{{"forecaster", o.kind},
                {"window", o.window},
                {"ar_order", o.ar_order},
                {"fit_window", o.fit_window},
                {"refit_every", o.refit_every}};
}

void check_deltas(const std::vector<double>& deltas) {
    if (deltas.empty()) {
        throw ValidationError("at least one delta is required");
    }
    for (double d : deltas) {
        if (!std::isfinite(d) || d < 0.0) {
            throw ValidationError("deltas must be finite and >= 0");
        }
    }
}

json nullable(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string render(const json& j) {
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

Result cmd_simulate(const SimulateOptions& o) {
    const auto config = protocol_config(o.forecast, o.delta);
    auto input = load_input(o.input);
    const auto log = run_session(input.series, config);
    const auto m = compute_metrics(log);
    const auto framed = frame_stream(log);

    Result r;
    std::ostringstream session;
    write_session_csv(log, session);

    json metrics{{"n", m.n},
                 {"sent", m.sent},
                 {"data_sent_pct", m.data_sent_pct},
                 {"mse", m.mse},
                 {"nmse", nullable(m.nmse)},
                 {"max_abs_error", m.max_abs_error},
                 {"bootstrap", log.bootstrap},
                 {"frames", framed.frames.size()},
                 {"payload_bytes", framed.payload_bytes},
                 {"wire_bytes", framed.wire_bytes},
                 {"full_payload_bytes", framed.full_payload_bytes},
                 {"data_fraction", framed.data_fraction()}};

    r.files.push_back({"session.csv", session.str()});
    r.files.push_back({"metrics.json", render(metrics)});
    if (o.dump_frames) {
        const auto bytes = serialize(framed);
        r.files.push_back({"frames.bin", std::string(bytes.begin(), bytes.end())});
    }
    r.stdout_text = session.str();
    std::ostringstream summary;
    summary << "sent " << m.sent << " of " << m.n << " samples (" << format_double(m.data_sent_pct)
            << "%), mse " << format_double(m.mse) << ", nmse "
            << (m.nmse ? format_double(*m.nmse) : std::string("n/a")) << "\n";
    r.stderr_text = summary.str();

    r.config = forecast_json(o.forecast);
    r.config["delta"] = o.delta;
    r.config["dump_frames"] = o.dump_frames;
    r.input = input.description;
    return r;
}

Result cmd_sweep(const SweepOptions& o) {
    if (o.format != "csv" && o.format != "json") {
        throw ValidationError("--format must be csv or json");
    }
    check_deltas(o.deltas);
    std::vector<ProtocolConfig> configs;
    for (const auto& name : o.forecasters) {
        auto f = o.forecast;
        f.kind = name;
        configs.push_back(protocol_config(f, 0.0));
    }
    auto input = load_input(o.input);
    const auto rows = sweep(input.series, o.deltas, configs);

    Result r;
    if (o.format == "csv") {
        std::ostringstream csv;
        write_sweep_csv(rows, csv);
        r.files.push_back({"sweep.csv", csv.str()});
        r.stdout_text = csv.str();
    } else {
        json table = json::array();
        for (const auto& row : rows) {
            for (const auto& cell : row.cells) {
                table.push_back(json{{"delta", row.delta},
                                     {"forecaster", cell.forecaster},
                                     {"data_sent_pct", cell.metrics.data_sent_pct},
                                     {"mse", cell.metrics.mse},
                                     {"nmse", nullable(cell.metrics.nmse)},
                                     {"max_abs_error", cell.metrics.max_abs_error}});
            }
        }
        r.files.push_back({"sweep.json", render(table)});
        r.stdout_text = render(table);
    }
    r.config = forecast_json(o.forecast);
    r.config.erase("forecaster");
    r.config["deltas"] = o.deltas;
    r.config["forecasters"] = o.forecasters;
    r.config["format"] = o.format;
    r.input = input.description;
    return r;
}

Result cmd_anomaly(const AnomalyOptions& o) {
    check_deltas(o.deltas);
    ForestConfig forest{o.forest.trees, o.forest.tree_size, o.forest.shingle, o.forest.seed};
    validate(forest);
    const auto tolerance = o.tolerance.value_or(forest.shingle);
    std::vector<ProtocolConfig> configs;
    for (double d : o.deltas) {
        configs.push_back(protocol_config(o.forecast, d));
    }
    auto input = load_input(o.input);
    const auto truth = input.series.values();
    const auto true_scores = score_stream(truth, forest);

    Result r;
    json report = json::array();
    std::ostringstream text;
    auto events = [](const std::vector<PeakEvent>& peaks) {
        json a = json::array();
        for (const auto& p : peaks) {
            a.push_back(json{{"first", p.first}, {"last", p.last}, {"argmax", p.argmax}});
        }
        return a;
    };
    auto list = [](const std::vector<PeakEvent>& peaks) {
        std::string s;
        for (const auto& p : peaks) {
            s += (s.empty() ? "" : " ") + std::to_string(p.first) + "-" + std::to_string(p.last);
        }
        return s.empty() ? std::string("none") : s;
    };
    for (const auto& config : configs) {
        const auto log = run_session(input.series, config);
        const auto processed_scores = score_stream(log.processed_values(), forest);
        const auto cmp = compare_peaks(true_scores, processed_scores, o.threshold, tolerance);

        std::ostringstream csv;
        csv << "index,score_true,score_processed\n";
        for (std::size_t i = 0; i < truth.size(); ++i) {
            csv << i << ',' << format_double(true_scores[i]) << ',' << format_double(processed_scores[i]) << '\n';
        }
        r.files.push_back({"scores_delta_" + format_double(config.delta) + ".csv", csv.str()});

        const double sent_pct = 100.0 * log.sent_fraction();
        report.push_back(json{{"delta", config.delta},
                              {"data_sent_pct", sent_pct},
                              {"peaks_preserved", cmp.preserved()},
                              {"true_peaks", events(cmp.true_peaks)},
                              {"processed_peaks", events(cmp.processed_peaks)},
                              {"false_positives", events(cmp.false_positives)},
                              {"misses", events(cmp.misses)}});
        text << "delta " << format_double(config.delta) << ": sent " << format_double(sent_pct) << "%, true peaks "
             << cmp.true_peaks.size() << ", processed peaks " << cmp.processed_peaks.size()
             << ", peaks preserved: " << (cmp.preserved() ? "yes" : "no") << "\n";
        if (!cmp.preserved()) {
            text << "  false positives: " << list(cmp.false_positives) << "\n"
                 << "  misses: " << list(cmp.misses) << "\n";
        }
    }
    r.files.push_back({"peaks.json", render(report)});
    r.stdout_text = text.str();

    r.config = forecast_json(o.forecast);
    r.config["deltas"] = o.deltas;
    r.config["trees"] = forest.num_trees;
    r.config["tree_size"] = forest.tree_capacity;
    r.config["shingle"] = forest.shingle;
    r.config["threshold"] = o.threshold;
    r.config["tolerance"] = tolerance;
    r.config["seed"] = forest.seed;
    r.seed = forest.seed;
    r.input = input.description;
    return r;
}

Result cmd_lifetime(const LifetimeOptions& o) {
    auto profile = find_profile(o.tech);
    if (o.rate) {
        profile.data_rate_bytes_per_s = *o.rate;
    }
    if (o.tis.empty() || o.fractions.empty()) {
        throw ValidationError("at least one --ti and one fraction are required");
    }
    for (double f : o.fractions) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw ValidationError("fraction " + format_double(f) + " outside [0, 1]");
        }
    }
    for (double ti : o.tis) {
        if (!(ti > 0.0) || !std::isfinite(ti)) {
            throw ValidationError("transmission interval must be > 0");
        }
    }
    TrafficModel base;
    base.battery_energy_j = o.battery;
    base.payload_full_bytes = o.payload;
    base.overhead_bytes = o.overhead;

    std::ostringstream csv;
    csv << "ti,fraction,years\n";
    for (double ti : o.tis) {
        for (const auto& [fraction, years] : lifetime_curve(profile, ti, o.fractions, base)) {
            csv << format_double(ti) << ',' << format_double(fraction) << ',' << format_double(years) << '\n';
        }
    }
    Result r;
    r.files.push_back({"lifetime.csv", csv.str()});
    r.stdout_text = csv.str();
    r.config = json{{"tech", o.tech},
                    {"ti", o.tis},
                    {"fractions", o.fractions},
                    {"battery_j", o.battery},
                    {"payload_bytes", o.payload},
                    {"rate_bytes_per_s", profile.data_rate_bytes_per_s},
                    {"overhead_bytes", o.overhead}};
    return r;
}

Result cmd_compare(const CompareOptions& o) {
    if (o.ns.empty()) {
        throw ValidationError("at least one --n is required");
    }
    auto window = o.forecast;
    window.kind = "window";
    auto arima = o.forecast;
    arima.kind = "arima";
    const auto window_config = protocol_config(window, 0.0).forecaster;
    const auto arima_config = protocol_config(arima, 0.0).forecaster;

    Result r;
    const std::size_t longest = *std::max_element(o.ns.begin(), o.ns.end());
    for (std::size_t n : o.ns) {
        if (n < 1000) {
            r.stderr_text += "warning: n = " + std::to_string(n) + " is below 1000; timings will be noisy\n";
        }
    }
    SyntheticSpec spec;
    spec.kind = SignalKind::sinusoid;
    spec.length = std::max<std::size_t>(longest, 1);
    spec.amplitude = 2.0;
    spec.period = 50.0;
    spec.noise_std = 0.6;
    spec.seed = o.seed;
    const auto stream = generate(spec).values();

    std::ostringstream csv;
    csv << "n,window_s_per_sample,arima_s_per_sample,ratio\n";
    for (std::size_t n : o.ns) {
        const std::span<const double> head(stream.data(), n);
        const auto w = measure_throughput(window_config, head, o.reps);
        const auto a = measure_throughput(arima_config, head, o.reps);
        const double ratio = w.seconds_per_sample > 0.0 ? a.seconds_per_sample / w.seconds_per_sample : 0.0;
        csv << n << ',' << format_double(w.seconds_per_sample) << ',' << format_double(a.seconds_per_sample) << ','
            << format_double(ratio) << '\n';
    }
    r.files.push_back({"timing.csv", csv.str()});
    r.stdout_text = csv.str();
    r.config = forecast_json(o.forecast);
    r.config.erase("forecaster");
    r.config["n"] = o.ns;
    r.config["reps"] = o.reps;
    r.config["seed"] = o.seed;
    r.seed = o.seed;
    return r;
}

Result cmd_displacement(const DisplacementOptions& o) {
    check_deltas(o.deltas);
    std::vector<ProtocolConfig> configs;
    for (double d : o.deltas) {
        configs.push_back(protocol_config(o.forecast, d));
    }
    auto input = load_input(o.input);
    std::vector<DisplacementImpact> impacts;
    for (const auto& c : configs) {
        impacts.push_back(displacement_impact(input.series, c));
    }

    std::ostringstream csv;
    csv << "index,displacement_true";
    for (const auto& imp : impacts) {
        csv << ",displacement_processed_" << format_double(imp.delta);
    }
    csv << '\n';
    const auto& truth = impacts.front().displacement_true;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        csv << i << ',' << format_double(truth[i]);
        for (const auto& imp : impacts) {
            csv << ',' << format_double(imp.displacement_processed[i]);
        }
        csv << '\n';
    }
    json report = json::array();
    std::string summary;
    for (const auto& imp : impacts) {
        report.push_back(json{{"delta", imp.delta},
                              {"data_sent_pct", imp.data_sent_pct},
                              {"mse_displacement_m2", imp.mse_displacement}});
        summary += "delta " + format_double(imp.delta) + ": sent " + format_double(imp.data_sent_pct) +
                   "%, displacement mse " + format_double(imp.mse_displacement) + " m^2\n";
    }
    Result r;
    r.files.push_back({"displacement.csv", csv.str()});
    r.files.push_back({"displacement_report.json", render(report)});
    r.stdout_text = csv.str();
    r.stderr_text = summary;
    r.config = forecast_json(o.forecast);
    r.config["deltas"] = o.deltas;
    r.input = input.description;
    return r;
}

// ---------------------------------------------------------------------------

std::vector<std::string> strip_out_dir(const std::vector<std::string>& args) {
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out-dir") {
            ++i;
            continue;
        }
        if (args[i].starts_with("--out-dir=")) {
            continue;
        }
        kept.push_back(args[i]);
    }
    return kept;
}

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    for (const auto& f : files) {
        std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
        out.write(f.contents.data(), static_cast<std::streamsize>(f.contents.size()));
        if (!out) {
            throw Error("cannot write '" + (dir / f.name).string() + "'");
        }
    }
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

Result cmd_replay(const ReplayOptions& o, std::vector<std::string>& replay_args) {
    std::ifstream in(o.manifest);
    if (!in) {
        throw ValidationError("cannot open manifest '" + o.manifest + "'");
    }
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
    if (!manifest.contains("subcommand") || !manifest.contains("args") || manifest.value("tool", "") != "ambrosia") {
        throw ValidationError("not an ambrosia manifest: '" + o.manifest + "'");
    }
    const auto& input = manifest["input"];
    if (input.is_object() && input.value("source", "") == "file") {
        std::ifstream data(input.value("path", ""), std::ios::binary);
        if (!data) {
            throw ValidationError("manifest input '" + input.value("path", "") + "' is missing");
        }
        const std::string bytes((std::istreambuf_iterator<char>(data)), std::istreambuf_iterator<char>());
        if (digest(bytes) != input.value("digest", "")) {
            throw Error("input '" + input.value("path", "") + "' changed since the manifest was written");
        }
    }
    replay_args.push_back(manifest["subcommand"].get<std::string>());
    for (const auto& a : manifest["args"]) {
        replay_args.push_back(a.get<std::string>());
    }
    return {};
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
    CLI::App app{"Dual-prediction data reduction for sensor streams: simulate sessions, sweep error thresholds, "
                 "score anomalies, integrate displacement and model battery lifetime.",
                 "ambrosia"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    std::string out_dir;
    app.add_option("--out-dir", out_dir,
                   std::string("Write output files and manifest.json here instead of printing to stdout (default: $") +
                       kOutDirEnv + ")");

    SimulateOptions simulate;
    auto* c_sim = app.add_subcommand("simulate", "Run one encoder/decoder session and report data sent and error");
    add_input_flags(*c_sim, simulate.input);
    add_forecast_flags(*c_sim, simulate.forecast);
    c_sim->add_option("--delta", simulate.delta,
                      "Error threshold: a sample is sent only when |true - predicted| > delta")
        ->capture_default_str();
    c_sim->add_flag("--dump-frames", simulate.dump_frames, "Also write the framed transmission as frames.bin");

    SweepOptions sweep_opts;
    auto* c_sweep = app.add_subcommand("sweep", "Data sent and normalised MSE across thresholds and forecasters");
    add_input_flags(*c_sweep, sweep_opts.input);
    add_forecast_flags(*c_sweep, sweep_opts.forecast);
    c_sweep->add_option("--deltas", sweep_opts.deltas, "Ascending error thresholds")
        ->delimiter(',')
        ->capture_default_str();
    c_sweep->add_option("--forecasters", sweep_opts.forecasters, "Forecasters to compare (window, arima)")
        ->delimiter(',')
        ->capture_default_str();
    c_sweep->add_option("--format", sweep_opts.format, "csv or json")->capture_default_str();

    AnomalyOptions anomaly;
    auto* c_anom = app.add_subcommand(
        "anomaly", "Random cut forest CoDisp scores on true vs processed streams and a peak preservation report");
    add_input_flags(*c_anom, anomaly.input);
    add_forecast_flags(*c_anom, anomaly.forecast);
    add_forest_flags(*c_anom, anomaly.forest);
    c_anom->add_option("--deltas", anomaly.deltas, "Error thresholds to evaluate")
        ->delimiter(',')
        ->capture_default_str();
    c_anom->add_option("--threshold", anomaly.threshold, "Score above which an index is part of a peak")
        ->capture_default_str();
    c_anom->add_option("--tolerance", anomaly.tolerance,
                       "Index slack when matching true and processed peaks (default: shingle)");

    LifetimeOptions lifetime;
    auto* c_life = app.add_subcommand("lifetime", "Battery lifetime versus fraction of data sent");
    c_life->add_option("--tech", lifetime.tech, "Radio: 802.11psm, ble, 802.15.4, lora or sigfox")
        ->capture_default_str();
    c_life->add_option("--ti", lifetime.tis, "Transmission interval(s) in seconds")
        ->delimiter(',')
        ->capture_default_str();
    c_life->add_option("--fractions", lifetime.fractions, "Fractions of the full payload sent, each in [0, 1]")
        ->delimiter(',')
        ->capture_default_str();
    c_life->add_option("--battery", lifetime.battery, "Battery energy in joules")->capture_default_str();
    c_life->add_option("--payload", lifetime.payload, "Bytes per interval at 100% transmission")
        ->capture_default_str();
    c_life->add_option("--rate", lifetime.rate, "Override the radio data rate, bytes/s");
    c_life->add_option("--overhead-bytes", lifetime.overhead, "Fixed radio overhead per transmission, bytes")
        ->capture_default_str();

    CompareOptions compare;
    auto* c_cmp = app.add_subcommand("compare-forecasters",
                                     "Per-sample execution time of the window and ARIMA forecasters");
    add_forecast_flags(*c_cmp, compare.forecast);
    compare.forecast.refit_every = 1;
    c_cmp->add_option("--n", compare.ns, "Stream lengths to time")->delimiter(',')->capture_default_str();
    c_cmp->add_option("--reps", compare.reps, "Repetitions per measurement (median reported)")->capture_default_str();
    c_cmp->add_option("--seed", compare.seed, "Seed of the timed synthetic stream")->capture_default_str();

    DisplacementOptions displacement;
    auto* c_disp = app.add_subcommand("displacement",
                                      "Double-integrate acceleration from true and processed streams");
    add_input_flags(*c_disp, displacement.input);
    add_forecast_flags(*c_disp, displacement.forecast);
    c_disp->add_option("--deltas", displacement.deltas, "Error thresholds, one processed curve each")
        ->delimiter(',')
        ->capture_default_str();

    ReplayOptions replay;
    auto* c_replay = app.add_subcommand("replay", "Re-run the invocation recorded in a manifest.json");
    c_replay->add_option("--manifest", replay.manifest, "Manifest written next to earlier outputs")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    if (out_dir.empty()) {
        if (const char* env = std::getenv(kOutDirEnv); env != nullptr) {
            out_dir = env;
        }
    }

    try {
        Result result;
        std::string name;
        if (c_sim->parsed()) {
            name = "simulate";
            result = cmd_simulate(simulate);
        } else if (c_sweep->parsed()) {
            name = "sweep";
            result = cmd_sweep(sweep_opts);
        } else if (c_anom->parsed()) {
            name = "anomaly";
            result = cmd_anomaly(anomaly);
        } else if (c_life->parsed()) {
            name = "lifetime";
            result = cmd_lifetime(lifetime);
        } else if (c_cmp->parsed()) {
            name = "compare-forecasters";
            result = cmd_compare(compare);
        } else if (c_disp->parsed()) {
            name = "displacement";
            result = cmd_displacement(displacement);
        } else {
            if (depth > 0) {
                throw ValidationError("a manifest cannot replay another replay");
            }
            std::vector<std::string> replay_args;
            cmd_replay(replay, replay_args);
            if (!out_dir.empty()) {
                replay_args.push_back("--out-dir");
                replay_args.push_back(out_dir);
            }
            // Global flags must precede the subcommand.
            std::rotate(replay_args.rbegin(), replay_args.rbegin() + (out_dir.empty() ? 0 : 2), replay_args.rend());
            return dispatch(replay_args, out, err, depth + 1);
        }

        err << result.stderr_text;
        if (out_dir.empty()) {
            out << result.stdout_text;
            return kExitOk;
        }
        if (!result.seed && result.input.is_object() && result.input.value("source", "") == "generator") {
            result.seed = parse_gen_spec(result.input["spec"].get<std::string>()).seed;
        }
        json manifest{{"tool", "ambrosia"},
                      {"version", kVersion},
                      {"subcommand", name},
                      {"args", json::array()},
                      {"config", result.config},
                      {"input", result.input},
                      {"seed", result.seed ? json(*result.seed) : json(nullptr)}};
        // Arguments after the subcommand name, minus the output location.
        auto sub = std::find(args.begin(), args.end(), name);
        for (const auto& a : strip_out_dir(std::vector<std::string>(std::next(sub), args.end()))) {
            manifest["args"].push_back(a);
        }
        result.files.push_back({"manifest.json", render(manifest)});
        write_outputs(out_dir, result.files);
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

SyntheticSpec parse_gen_spec(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ValidationError("--gen expects kind:length[,key=value...], got '" + text + "'");
    }
    SyntheticSpec spec;
    spec.kind = parse_signal_kind(text.substr(0, colon));
    const auto parts = split(text.substr(colon + 1), ',');
    if (parts.empty()) {
        throw ValidationError("--gen is missing the length");
    }
    spec.length = static_cast<std::size_t>(to_u64(parts[0], "length"));
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw ValidationError("--gen parameter '" + parts[i] + "' is not key=value");
        }
        const auto key = parts[i].substr(0, eq);
        const auto value = parts[i].substr(eq + 1);
        if (key == "level") {
            spec.level = to_double(value, key);
        } else if (key == "slope") {
            spec.slope = to_double(value, key);
        } else if (key == "intercept") {
            spec.intercept = to_double(value, key);
        } else if (key == "amplitude") {
            spec.amplitude = to_double(value, key);
        } else if (key == "period") {
            spec.period = to_double(value, key);
        } else if (key == "phi") {
            spec.phi = to_double(value, key);
        } else if (key == "noise") {
            spec.noise_std = to_double(value, key);
        } else if (key == "seed") {
            spec.seed = to_u64(value, key);
        } else if (key == "dt") {
            spec.sample_period = to_double(value, key);
        } else if (key == "spike") {
            const auto at = value.find('@');
            if (at == std::string::npos) {
                throw ValidationError("spike expects INDEX@MAGNITUDE, got '" + value + "'");
            }
            spec.anomalies.push_back(Anomaly{static_cast<std::size_t>(to_u64(value.substr(0, at), "spike index")),
                                             to_double(value.substr(at + 1), "spike magnitude")});
        } else {
            throw ValidationError("unknown --gen key '" + key + "'");
        }
    }
    return spec;
}

std::string digest(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out = "fnv1a64:";
    for (int shift = 60; shift >= 0; shift -= 4) {
        out += kHex[(h >> shift) & 0xF];
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return dispatch(args, out, err, 0);
}

}  // namespace ambrosia::cli
