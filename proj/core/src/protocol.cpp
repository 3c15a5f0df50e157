#include "ambrosia/protocol.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "ambrosia/error.hpp"

namespace ambrosia {

void validate(const ProtocolConfig& config) {
    if (!std::isfinite(config.delta) || config.delta < 0.0) {
        throw ValidationError("delta must be finite and >= 0");
    }
    validate(config.forecaster);
}

std::size_t bootstrap_length(const ForecasterConfig& config) {
    return config.kind == ForecasterKind::window ? config.window + 1 : config.fit_window;
}

Encoder::Encoder(ProtocolConfig config)
    : config_(config), bootstrap_(bootstrap_length(config.forecaster)) {
    validate(config_);
    forecaster_ = make_forecaster(config_.forecaster);
}

Encoder::Encoder(const Encoder& other)
    : config_(other.config_),
      bootstrap_(other.bootstrap_),
      forecaster_(other.forecaster_->clone()),
      processed_(other.processed_),
      sent_(other.sent_) {}

Encoder& Encoder::operator=(const Encoder& other) {
    if (this != &other) {
        Encoder copy(other);
        *this = std::move(copy);
    }
    return *this;
}

std::optional<double> Encoder::prediction() const {
    if (processed_.size() < bootstrap_) {
        return std::nullopt;
    }
    return forecaster_->predict_next();
}

Decision Encoder::step(double true_value) {
    if (!std::isfinite(true_value)) {
        throw ValidationError("non-finite input value at index " + std::to_string(processed_.size()));
    }
    Decision decision{true, true_value};
    if (processed_.size() >= bootstrap_) {
        const double predicted = forecaster_->predict_next();
        // Strict inequality: an error equal to delta is suppressed.
        if (!(std::abs(true_value - predicted) > config_.delta)) {
            decision = Decision{false, predicted};
        }
    }
    forecaster_->observe(decision.value);
    processed_.push_back(decision.value);
    if (decision.sent) {
        ++sent_;
    }
    return decision;
}

Decoder::Decoder(ProtocolConfig config)
    : config_(config), bootstrap_(bootstrap_length(config.forecaster)) {
    validate(config_);
    forecaster_ = make_forecaster(config_.forecaster);
}

double Decoder::step(std::optional<double> received) {
    double value;
    if (received) {
        value = *received;
    } else {
        if (reconstructed_.size() < bootstrap_) {
            throw Error("stream corruption: index " + std::to_string(reconstructed_.size()) +
                        " missing inside the bootstrap region");
        }
        value = forecaster_->predict_next();
    }
    forecaster_->observe(value);
    reconstructed_.push_back(value);
    return value;
}

double TransmissionLog::sent_fraction() const noexcept {
    return records.empty() ? 0.0 : static_cast<double>(samples_sent) / static_cast<double>(records.size());
}

std::vector<double> TransmissionLog::true_values() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.true_value);
    }
    return out;
}

std::vector<double> TransmissionLog::processed_values() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.processed_value);
    }
    return out;
}

TimeSeries TransmissionLog::processed_series() const {
    return TimeSeries::from_values(processed_values(), sample_period);
}

TransmissionLog run_session(const TimeSeries& series, const ProtocolConfig& config) {
    validate(config);
    const std::size_t bootstrap = bootstrap_length(config.forecaster);
    if (series.size() <= bootstrap) {
        throw ValidationError("series length " + std::to_string(series.size()) +
                              " must exceed the bootstrap length " + std::to_string(bootstrap));
    }

    Encoder encoder(config);
    Decoder decoder(config);
    TransmissionLog log;
    log.config = config;
    log.bootstrap = bootstrap;
    log.sample_period = series.sample_period();
    log.records.reserve(series.size());

    for (const auto& sample : series.samples()) {
        const Decision d = encoder.step(sample.value);
        const double reconstructed = decoder.step(d.sent ? std::optional<double>(d.value) : std::nullopt);
        if (std::bit_cast<std::uint64_t>(reconstructed) != std::bit_cast<std::uint64_t>(d.value)) {
            throw Error("encoder/decoder desynchronised at index " + std::to_string(sample.index));
        }
        log.records.push_back(TransmissionRecord{sample.index, sample.value, d.value, d.sent});
    }
    log.samples_sent = encoder.samples_sent();
    return log;
}

void write_session_csv(const TransmissionLog& log, std::ostream& out) {
    out << "index,true,processed,sent\n";
    for (const auto& r : log.records) {
        out << r.index << ',' << format_double(r.true_value) << ',' << format_double(r.processed_value) << ','
            << (r.sent ? 1 : 0) << '\n';
    }
}

double FramedStream::data_fraction() const noexcept {
    return full_payload_bytes == 0 ? 0.0
                                   : static_cast<double>(payload_bytes) / static_cast<double>(full_payload_bytes);
}

FramedStream frame_stream(const TransmissionLog& log) {
    if (log.records.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error("session too long for 32-bit frame indices");
    }
    FramedStream out;
    out.sample_count = static_cast<std::uint32_t>(log.records.size());
    Frame current;
    for (const auto& r : log.records) {
        if (!r.sent) {
            continue;
        }
        current.pairs.push_back(FramePair{static_cast<std::uint32_t>(r.index), r.true_value});
        if (current.pairs.size() == kMaxPairsPerFrame) {
            out.frames.push_back(std::move(current));
            current = Frame{};
        }
    }
    if (!current.pairs.empty()) {
        out.frames.push_back(std::move(current));
    }
    for (const auto& f : out.frames) {
        out.payload_bytes += f.payload_bytes();
        out.wire_bytes += 1 + f.payload_bytes();
    }
    if (out.sample_count > 0) {
        out.wire_bytes += kMarkerBytes;
    }
    out.full_payload_bytes = log.records.size() * kPairBytes;
    return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
        }
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        }
        return std::bit_cast<double>(v);
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw Error("truncated frame stream at byte " + std::to_string(pos_));
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const FramedStream& stream) {
    std::vector<std::uint8_t> out;
    out.reserve(stream.wire_bytes + kMarkerBytes);
    for (const auto& f : stream.frames) {
        out.push_back(static_cast<std::uint8_t>(f.pairs.size()));
        for (const auto& p : f.pairs) {
            put_u32(out, p.index);
            put_f64(out, p.value);
        }
    }
    out.push_back(0);
    put_u32(out, stream.sample_count);
    return out;
}

FramedStream deserialize(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    FramedStream out;
    std::optional<std::uint32_t> last_index;
    bool ended = false;
    while (!in.done()) {
        const std::uint8_t count = in.u8();
        if (count == 0) {
            out.sample_count = in.u32();
            ended = true;
            break;
        }
        if (count > kMaxPairsPerFrame) {
            throw Error("frame declares " + std::to_string(count) + " pairs, maximum is " +
                        std::to_string(kMaxPairsPerFrame));
        }
        Frame f;
        for (std::uint8_t i = 0; i < count; ++i) {
            FramePair p;
            p.index = in.u32();
            p.value = in.f64();
            if (last_index && p.index <= *last_index) {
                throw Error("frame indices must be strictly increasing");
            }
            last_index = p.index;
            f.pairs.push_back(p);
        }
        out.payload_bytes += f.payload_bytes();
        out.wire_bytes += 1 + f.payload_bytes();
        out.frames.push_back(std::move(f));
    }
    if (!ended) {
        throw Error("frame stream missing end-of-batch marker");
    }
    if (!in.done()) {
        throw Error("trailing bytes after end-of-batch marker");
    }
    if (last_index && *last_index >= out.sample_count) {
        throw Error("frame index beyond the declared sample count");
    }
    if (out.sample_count > 0) {
        out.wire_bytes += kMarkerBytes;
    }
    out.full_payload_bytes = static_cast<std::size_t>(out.sample_count) * kPairBytes;
    return out;
}

std::vector<double> reconstruct(const FramedStream& stream, const ProtocolConfig& config) {
    Decoder decoder(config);
    std::uint32_t next = 0;
    for (const auto& f : stream.frames) {
        for (const auto& p : f.pairs) {
            if (p.index < next) {
                throw Error("frame indices must be strictly increasing");
            }
            for (; next < p.index; ++next) {
                decoder.step(std::nullopt);
            }
            decoder.step(p.value);
            ++next;
        }
    }
    for (; next < stream.sample_count; ++next) {
        decoder.step(std::nullopt);
    }
    return decoder.reconstructed();
}

}  // namespace ambrosia
