// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ambrosia/ambrosia.hpp"
#include "cases.hpp"
#include "commands.hpp"
#include "oracles.hpp"

using namespace ambrosia;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

TimeSeries pinned(double dt = 1.0) {
    auto spec = cli::parse_gen_spec(golden::kPinnedSpec);
    spec.sample_period = dt;
    return generate(spec);
}

ProtocolConfig make_config(ForecasterKind kind, double delta, std::size_t w = 5) {
    ProtocolConfig c;
    c.delta = delta;
    c.forecaster.kind = kind;
    c.forecaster.window = w;
    return c;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
               return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
           });
}

Verdict sync_invariant() {
    const auto start = Clock::now();
    Rng rng(20240601);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        SyntheticSpec spec;
        spec.kind = static_cast<SignalKind>(rng.next_u64() % 5);
        spec.length = 100 + rng.next_u64() % 400;
        spec.noise_std = rng.uniform(0.0, 2.0);
        spec.seed = rng.next_u64();
        spec.slope = rng.uniform(-1.0, 1.0);
        spec.amplitude = rng.uniform(0.1, 5.0);
        spec.period = rng.uniform(5.0, 200.0);
        auto c = make_config(rng.uniform01() < 0.5 ? ForecasterKind::window : ForecasterKind::arima,
                             rng.uniform(0.0, 3.0), 1 + rng.next_u64() % 20);
        const auto log = run_session(generate(spec), c);

        Decoder decoder(c);
        for (const auto& r : log.records) {
            decoder.step(r.sent ? std::optional<double>(r.true_value) : std::nullopt);
        }
        const auto processed = log.processed_values();
        bool ok = bit_equal(decoder.reconstructed(), processed) &&
                  bit_equal(reconstruct(deserialize(serialize(frame_stream(log))), c), processed);
        for (std::size_t i = log.bootstrap; i < log.size(); ++i) {
            ok = ok && std::abs(processed[i] - log.records[i].true_value) <= c.delta;
        }
        failures += ok ? 0 : 1;
    }
    const double elapsed = seconds_since(start);
    return {failures == 0 && elapsed < 30.0,
            "1000 sessions, " + std::to_string(failures) + " violations, " + fmt(elapsed, 3) + " s"};
}

Verdict delta_zero() {
    Verdict v;
    for (auto kind : {ForecasterKind::window, ForecasterKind::arima}) {
        const auto m = compute_metrics(run_session(pinned(), make_config(kind, 0.0)));
        v.pass = v.pass && m.data_sent_pct == 100.0 && m.nmse && *m.nmse == 0.0;
        v.detail += to_string(kind) + ": sent " + fmt(m.data_sent_pct) + "%, nmse " +
                    (m.nmse ? fmt(*m.nmse) : "n/a") + "; ";
    }
    return v;
}

Verdict linear_exactness() {
    // Dyadic intercepts and slopes keep every sample exactly representable.
    Verdict v;
    int cases = 0;
    for (double slope : {0.5, -0.25, 3.0}) {
        for (std::size_t w : {1u, 5u, 20u}) {
            for (double delta : {0.01, 0.5, 2.5}) {
                std::vector<double> xs(10000);
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    xs[i] = -12.125 + slope * static_cast<double>(i);
                }
                const auto m =
                    compute_metrics(run_session(TimeSeries::from_values(xs), make_config(ForecasterKind::window, delta, w)));
                ++cases;
                if (m.sent != w + 1 || !m.nmse || *m.nmse != 0.0) {
                    v.pass = false;
                    v.detail += "slope " + fmt(slope) + " w " + std::to_string(w) + " sent " + std::to_string(m.sent) + "; ";
                }
            }
        }
    }
    if (v.pass) {
        v.detail = std::to_string(cases) + " affine series of length 10000, each sent exactly w+1";
    }
    return v;
}

Verdict forecaster_parity() {
    Verdict v;
    const auto series = pinned();
    for (double delta : {0.4, 0.8, 1.2}) {
        const double w = compute_metrics(run_session(series, make_config(ForecasterKind::window, delta))).data_sent_pct;
        const double a = compute_metrics(run_session(series, make_config(ForecasterKind::arima, delta))).data_sent_pct;
        v.pass = v.pass && std::abs(w - a) <= 10.0;
        v.detail += "delta " + fmt(delta) + ": " + fmt(w) + "% vs " + fmt(a) + "%; ";
    }
    return v;
}

Verdict throughput() {
    const auto start = Clock::now();
    SyntheticSpec spec;
    spec.kind = SignalKind::sinusoid;
    spec.length = 100000;
    spec.amplitude = 2.0;
    spec.noise_std = 0.6;
    spec.seed = 1;
    const auto stream = generate(spec).values();
    ForecasterConfig window;
    ForecasterConfig arima;
    arima.kind = ForecasterKind::arima;
    arima.refit_every = 1;
    const auto tw = measure_throughput(window, stream, 5);
    const auto ta = measure_throughput(arima, stream, 5);
    const double ratio = ta.seconds_per_sample / tw.seconds_per_sample;
    const double elapsed = seconds_since(start);
    return {ratio >= 10.0 && elapsed < 60.0, "n=100000: window " + fmt(tw.seconds_per_sample * 1e9, 3) +
                                                 " ns/sample, arima " + fmt(ta.seconds_per_sample * 1e9, 4) +
                                                 " ns/sample, ratio " + fmt(ratio, 3) + ", " + fmt(elapsed, 3) + " s"};
}

Verdict rrcf() {
    Verdict v;
    // (a) structural validator over random mutations.
    Rng rng(31337);
    RcTree tree(3, 5);
    std::vector<Point> live;
    bool valid = true;
    for (int op = 0; op < 10000 && valid; ++op) {
        if (live.empty() || rng.uniform01() < 0.55) {
            Point p{std::floor(rng.uniform(0, 8)), rng.normal(), std::floor(rng.uniform(0, 3))};
            tree.insert(p);
            live.push_back(p);
        } else {
            const auto k = static_cast<std::size_t>(rng.next_u64() % live.size());
            tree.forget(live[k]);
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
        }
        valid = tree.check_invariants().empty() && tree.size() == live.size();
    }
    v.pass = valid;
    v.detail = std::string("(a) validator ") + (valid ? "held" : "FAILED") + " over 10000 ops; ";

    // (b) exact expectation on {0, 1, 10}.
    const std::vector<double> pts{0.0, 1.0, 10.0};
    const auto exact = oracle::random_cut_trees_1d(pts);
    Forest forest(ForestConfig{200, 16, 1, 0}, 1);
    for (double p : pts) {
        forest.update({p});
    }
    v.detail += "(b)";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double est = forest.codisp({pts[i]});
        v.pass = v.pass && std::abs(est - exact.expected_codisp[i]) <= 0.1 * exact.expected_codisp[i];
        v.detail += " " + fmt(est, 3) + "/" + fmt(exact.expected_codisp[i], 3);
    }

    // (c) injected spike.
    SyntheticSpec spec;
    spec.kind = SignalKind::sinusoid;
    spec.length = 600;
    spec.amplitude = 2.0;
    spec.noise_std = 0.3;
    spec.seed = 13;
    spec.anomalies = {{300, 12.0}};
    const ForestConfig config{};
    const auto scores = score_stream(generate(spec).values(), config);
    const auto peak = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    const bool located = peak + config.shingle >= 300 && peak <= 300 + config.shingle;
    v.pass = v.pass && located;
    v.detail += "; (c) spike at 300, argmax " + std::to_string(peak);
    return v;
}

Verdict peak_preservation() {
    const auto series = pinned();
    const ForestConfig forest{};
    const auto truth = score_stream(series.values(), forest);
    std::vector<std::pair<double, bool>> outcome;
    std::string detail;
    double preserved_low = -1.0;
    double broken_high = -1.0;
    for (double delta : {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.6, 2.0, 3.0, 5.0, 8.0, 12.0}) {
        const auto log = run_session(series, make_config(ForecasterKind::window, delta));
        const auto cmp = compare_peaks(truth, score_stream(log.processed_values(), forest), 50.0, forest.shingle);
        const double sent = 100.0 * log.sent_fraction();
        if (cmp.preserved() && sent <= 70.0 && preserved_low < 0.0) {
            preserved_low = delta;
            detail += "preserved at delta " + fmt(delta) + " with " + fmt(sent) + "% sent; ";
        }
        if (!cmp.preserved() && preserved_low >= 0.0 && broken_high < 0.0) {
            broken_high = delta;
            detail += "broken at delta " + fmt(delta) + " (" + std::to_string(cmp.misses.size()) + " misses, " +
                      std::to_string(cmp.false_positives.size()) + " false positives)";
        }
    }
    return {preserved_low >= 0.0 && broken_high > preserved_low, detail};
}

Verdict energy_anchors() {
    Verdict v;
    const auto& lora = find_profile("lora");
    TrafficModel t;
    t.ti_s = 3600.0;
    t.data_fraction = 1.0;
    const double full = lifetime_years(lora, t);
    t.data_fraction = 0.5;
    const double half = lifetime_years(lora, t);
    t.data_fraction = 1.0;
    const double ble = lifetime_years(find_profile("ble"), t);
    v.pass = std::abs(full - 3.5) <= 0.05 * 3.5 && half >= 6.0 && half <= 6.0 * 1.15 &&
             std::abs(ble - 29.18) <= 0.1 * 29.18;
    bool decreasing = true;
    std::vector<double> fractions;
    for (int i = 0; i <= 100; ++i) {
        fractions.push_back(i / 100.0);
    }
    for (const auto& p : builtin_profiles()) {
        const auto curve = lifetime_curve(p, 3600.0, fractions);
        for (std::size_t i = 1; i < curve.size(); ++i) {
            decreasing = decreasing && curve[i].second < curve[i - 1].second;
        }
    }
    v.pass = v.pass && decreasing;
    v.detail = "LoRa 100% " + fmt(full) + " y, 50% " + fmt(half) + " y; BLE 100% " + fmt(ble) +
               " y; strictly decreasing for all profiles: " + (decreasing ? "yes" : "no");
    return v;
}

Verdict displacement() {
    Verdict v;
    const auto k = double_integrate(TimeSeries::from_values(std::vector<double>(101, 2.0), 0.1));
    double worst = 0.0;
    for (std::size_t i = 0; i < k.displacement.size(); ++i) {
        const double t = 0.1 * static_cast<double>(i);
        worst = std::max(worst, std::abs(k.displacement[i] - t * t));
    }
    v.pass = worst <= 1e-12;
    v.detail = "closed-form error " + fmt(worst, 2) + "; mse";
    const auto accel = pinned(0.05);
    double previous = -1.0;
    for (double delta : {0.3, 0.5, 1.0}) {
        const double mse = displacement_impact(accel, make_config(ForecasterKind::window, delta)).mse_displacement;
        v.pass = v.pass && mse > previous;
        previous = mse;
        v.detail += " " + fmt(mse) + " m^2";
    }
    v.detail += " for delta 0.3/0.5/1.0";
    return v;
}

Verdict determinism() {
    Verdict v;
    int files = 0;
    for (const auto& c : golden::cases()) {
        const fs::path dir = fs::path(AMBROSIA_GOLDEN_DIR) / c.name;
        const auto expected = golden::read_dir(dir);
        if (expected.empty()) {
            v.pass = false;
            v.detail += c.name + ": no golden files; ";
            continue;
        }
        files += static_cast<int>(expected.size());
        for (int round = 0; round < 2; ++round) {
            const auto out = golden::scratch("accept");
            std::string err;
            const int code = golden::run_into({"replay", "--manifest", (dir / "manifest.json").string()}, out, &err);
            const auto problem = code != 0 ? err : golden::diff(expected, golden::read_dir(out));
            fs::remove_all(out);
            if (!problem.empty()) {
                v.pass = false;
                v.detail += c.name + " run " + std::to_string(round + 1) + ": " + problem + "; ";
            }
        }
    }
    if (v.pass) {
        v.detail = std::to_string(golden::cases().size()) + " manifests, " + std::to_string(files) +
                   " files byte-identical on two replays";
    }
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"SYNC invariant", sync_invariant},
        {"delta=0 totality", delta_zero},
        {"linear exactness", linear_exactness},
        {"forecaster parity", forecaster_parity},
        {"throughput ordering", throughput},
        {"RRCF correctness", rrcf},
        {"peak preservation", peak_preservation},
        {"energy anchors", energy_anchors},
        {"displacement", displacement},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << "criterion " << (i + 1) << " [" << (v.pass ? "PASS" : "FAIL") << "] " << criteria[i].first
                  << ": " << v.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
