#include <doctest.h>

#include <bit>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ambrosia/error.hpp"
#include "ambrosia/protocol.hpp"
#include "ambrosia/random.hpp"

using namespace ambrosia;

namespace {

ProtocolConfig window_config(std::size_t w, double delta) {
    ProtocolConfig c;
    c.delta = delta;
    c.forecaster.kind = ForecasterKind::window;
    c.forecaster.window = w;
    return c;
}

std::string decisions(const TransmissionLog& log) {
    std::string s;
    for (const auto& r : log.records) {
        s += r.sent ? 'S' : 'U';
    }
    return s;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
            return false;
        }
    }
    return true;
}

// Plain re-statement of the window protocol: keep the processed history,
// predict from its last w+1 entries, send when the error strictly exceeds delta.
std::vector<bool> reference_window_decisions(const std::vector<double>& xs, std::size_t w, double delta) {
    std::vector<double> processed;
    std::vector<bool> sent;
    for (double x : xs) {
        if (processed.size() <= w) {
            processed.push_back(x);
            sent.push_back(true);
            continue;
        }
        const std::size_t n = processed.size() - 1;
        const double pred = processed[n] + (processed[n] - processed[n - w]) / static_cast<double>(w);
        const bool send = std::abs(x - pred) > delta;
        processed.push_back(send ? x : pred);
        sent.push_back(send);
    }
    return sent;
}

TimeSeries random_series(Rng& rng, std::size_t n) {
    SyntheticSpec spec;
    spec.kind = static_cast<SignalKind>(rng.next_u64() % 5);
    spec.length = n;
    spec.noise_std = rng.uniform(0.0, 2.0);
    spec.seed = rng.next_u64();
    spec.level = rng.uniform(-5.0, 5.0);
    spec.slope = rng.uniform(-1.0, 1.0);
    spec.intercept = rng.uniform(-10.0, 10.0);
    spec.amplitude = rng.uniform(0.1, 5.0);
    spec.period = rng.uniform(5.0, 200.0);
    spec.phi = rng.uniform(-0.95, 0.95);
    if (rng.uniform01() < 0.3) {
        spec.anomalies.push_back({static_cast<std::size_t>(rng.next_u64() % n), rng.uniform(-20.0, 20.0)});
    }
    return generate(spec);
}

}  // namespace

TEST_CASE("constant series: bootstrap then suppression") {
    const auto log = run_session(TimeSeries::from_values(std::vector<double>{5, 5, 5, 5, 5}), window_config(2, 0.5));
    CHECK(decisions(log) == "SSSUU");
    CHECK(log.bootstrap == 3);
    CHECK(log.processed_values() == std::vector<double>{5, 5, 5, 5, 5});
}

TEST_CASE("hand-simulated w=1 session") {
    const auto log = run_session(TimeSeries::from_values(std::vector<double>{0, 0, 1, 1, 1}), window_config(1, 0.5));
    CHECK(decisions(log) == "SSSSU");
    CHECK(log.processed_values() == std::vector<double>{0, 0, 1, 1, 1});
    CHECK(log.sent_fraction() == 0.8);

    Decoder d(window_config(1, 0.5));
    std::vector<double> out;
    for (const auto& r : log.records) {
        out.push_back(d.step(r.sent ? std::optional<double>(r.true_value) : std::nullopt));
    }
    CHECK(out == std::vector<double>{0, 0, 1, 1, 1});
}

TEST_CASE("delta zero on noisy input sends everything and reconstructs exactly") {
    SyntheticSpec spec;
    spec.kind = SignalKind::sinusoid;
    spec.length = 500;
    spec.noise_std = 0.3;
    spec.seed = 4;
    const auto series = generate(spec);
    for (auto kind : {ForecasterKind::window, ForecasterKind::arima}) {
        auto c = window_config(5, 0.0);
        c.forecaster.kind = kind;
        const auto log = run_session(series, c);
        CHECK(log.samples_sent == series.size());
        CHECK(bit_equal(log.processed_values(), series.values()));
    }
}

TEST_CASE("linear ramp and constant at delta zero send only the bootstrap") {
    std::vector<double> ramp(300), flat(300, 3.0);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        ramp[i] = 0.5 * static_cast<double>(i) - 7.0;
    }
    for (std::size_t w : {1u, 4u, 9u}) {
        CHECK(run_session(TimeSeries::from_values(ramp), window_config(w, 0.25)).samples_sent == w + 1);
        CHECK(run_session(TimeSeries::from_values(flat), window_config(w, 0.0)).samples_sent == w + 1);
    }
}

TEST_CASE("library decisions match the reference protocol") {
    Rng rng(404);
    for (int trial = 0; trial < 300; ++trial) {
        const auto series = random_series(rng, 50 + rng.next_u64() % 300);
        const auto w = static_cast<std::size_t>(1 + rng.next_u64() % 20);
        const double delta = rng.uniform(0.0, 3.0);
        const auto log = run_session(series, window_config(w, delta));
        const auto expected = reference_window_decisions(series.values(), w, delta);
        for (std::size_t i = 0; i < expected.size(); ++i) {
            REQUIRE(log.records[i].sent == expected[i]);
        }
    }
}

TEST_CASE("SYNC and error bound over random sessions") {
    Rng rng(2718);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto series = random_series(rng, 80 + rng.next_u64() % 200);
        ProtocolConfig c;
        c.delta = rng.uniform(0.0, 3.0);
        c.forecaster.kind = rng.uniform01() < 0.5 ? ForecasterKind::window : ForecasterKind::arima;
        c.forecaster.window = static_cast<std::size_t>(1 + rng.next_u64() % 20);
        c.forecaster.ar_order = static_cast<std::size_t>(1 + rng.next_u64() % 4);
        c.forecaster.fit_window = 20 + rng.next_u64() % 40;
        const auto log = run_session(series, c);

        const auto framed = deserialize(serialize(frame_stream(log)));
        REQUIRE(bit_equal(reconstruct(framed, c), log.processed_values()));

        std::size_t sent = 0;
        for (std::size_t i = 0; i < log.size(); ++i) {
            const auto& r = log.records[i];
            if (i < log.bootstrap) {
                REQUIRE(r.sent);
            }
            if (r.sent) {
                ++sent;
                REQUIRE(r.processed_value == r.true_value);
            } else {
                REQUIRE(std::abs(r.processed_value - r.true_value) <= c.delta);
            }
        }
        REQUIRE(sent == log.samples_sent);
    }
}

TEST_CASE("suppression is monotone in delta at a single step") {
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const auto w = static_cast<std::size_t>(1 + rng.next_u64() % 10);
        const double d1 = rng.uniform(0.0, 2.0);
        const double d2 = d1 + rng.uniform(0.0, 2.0);
        Encoder a(window_config(w, d1));
        Encoder b(window_config(w, d2));
        for (std::size_t i = 0; i <= w; ++i) {
            const double x = rng.normal();
            a.step(x);
            b.step(x);
        }
        REQUIRE(a.prediction() == b.prediction());
        const double x = *a.prediction() + rng.uniform(-4.0, 4.0);
        const bool suppressed_small = !a.step(x).sent;
        const bool suppressed_large = !b.step(x).sent;
        if (suppressed_small) {
            CHECK(suppressed_large);
        }
    }
}

TEST_CASE("encoder copies are independent") {
    Encoder a(window_config(2, 0.1));
    for (double x : {1.0, 2.0, 3.0}) {
        a.step(x);
    }
    Encoder b = a;
    a.step(10.0);
    CHECK(b.samples_seen() == 3);
    CHECK(b.prediction() == 4.0);
}

TEST_CASE("decoder rejects suppression inside the bootstrap") {
    Decoder d(window_config(2, 0.5));
    d.step(1.0);
    CHECK_THROWS_AS(d.step(std::nullopt), Error);
}

TEST_CASE("session preconditions") {
    CHECK_THROWS_AS(run_session(TimeSeries::from_values(std::vector<double>{1, 2, 3}), window_config(2, 0.5)),
                    ValidationError);
    CHECK_THROWS_AS(validate(window_config(2, -1.0)), ValidationError);
    CHECK_THROWS_AS(validate(window_config(2, std::nan(""))), ValidationError);
    CHECK(bootstrap_length(window_config(4, 0.0).forecaster) == 5);
    ProtocolConfig ar;
    ar.forecaster.kind = ForecasterKind::arima;
    ar.forecaster.fit_window = 40;
    CHECK(bootstrap_length(ar.forecaster) == 40);
}

TEST_CASE("session csv layout") {
    const auto log = run_session(TimeSeries::from_values(std::vector<double>{0, 0, 1, 1, 1}), window_config(1, 0.5));
    std::ostringstream out;
    write_session_csv(log, out);
    CHECK(out.str() == "index,true,processed,sent\n0,0,0,1\n1,0,0,1\n2,1,1,1\n3,1,1,1\n4,1,1,0\n");
}

namespace {

TransmissionLog log_with_sent(std::size_t n, std::size_t sent) {
    TransmissionLog log;
    for (std::size_t i = 0; i < n; ++i) {
        log.records.push_back({i, static_cast<double>(i), static_cast<double>(i), i < sent});
    }
    log.samples_sent = sent;
    return log;
}

}  // namespace

TEST_CASE("framing arithmetic") {
    const auto five = frame_stream(log_with_sent(5, 5));
    CHECK(five.frames.size() == 1);
    CHECK(five.payload_bytes == 60);
    CHECK(five.payload_bytes <= kFramePayloadBytes);
    CHECK(five.wire_bytes == 1 + 60 + kMarkerBytes);

    CHECK(frame_stream(log_with_sent(6, 6)).frames.size() == 2);

    const auto empty = frame_stream(TransmissionLog{});
    CHECK(empty.frames.empty());
    CHECK(empty.payload_bytes == 0);
    CHECK(empty.wire_bytes == 0);
    CHECK(empty.data_fraction() == 0.0);

    const auto part = frame_stream(log_with_sent(20, 7));
    CHECK(part.frames.size() == 2);
    CHECK(part.data_fraction() == doctest::Approx(7.0 / 20.0));
}

TEST_CASE("framing conserves sent samples") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto series = random_series(rng, 60 + rng.next_u64() % 200);
        const auto log = run_session(series, window_config(1 + rng.next_u64() % 8, rng.uniform(0.0, 2.0)));
        const auto framed = frame_stream(log);
        std::size_t pairs = 0;
        for (const auto& f : framed.frames) {
            REQUIRE(f.pairs.size() >= 1);
            REQUIRE(f.pairs.size() <= kMaxPairsPerFrame);
            pairs += f.pairs.size();
        }
        CHECK(pairs == log.samples_sent);
        CHECK(framed.frames.size() == (log.samples_sent + 4) / 5);
        CHECK(deserialize(serialize(framed)) == framed);
    }
}

TEST_CASE("trailing suppressions are flushed by the end marker") {
    const auto log = run_session(TimeSeries::from_values(std::vector<double>(12, 2.0)), window_config(2, 0.5));
    CHECK(log.samples_sent == 3);
    const auto out = reconstruct(deserialize(serialize(frame_stream(log))), window_config(2, 0.5));
    CHECK(out == std::vector<double>(12, 2.0));
}

TEST_CASE("deserialize rejects malformed input") {
    const auto bytes = serialize(frame_stream(log_with_sent(8, 8)));
    CHECK_THROWS_AS(deserialize(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 1)), Error);
    CHECK_THROWS_AS(deserialize(std::span<const std::uint8_t>(bytes.data(), bytes.size() - kMarkerBytes)), Error);

    auto overlong = bytes;
    overlong[0] = 6;
    CHECK_THROWS_AS(deserialize(overlong), Error);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(deserialize(trailing), Error);

    // Swap the first two indices so they decrease.
    auto disordered = bytes;
    std::swap(disordered[1], disordered[13]);
    CHECK_THROWS_AS(deserialize(disordered), Error);
}
