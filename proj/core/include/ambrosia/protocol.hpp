#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ambrosia/forecast.hpp"
#include "ambrosia/timeseries.hpp"

namespace ambrosia {

struct ProtocolConfig {
    double delta = 0.5;  // error threshold, sensor units
    ForecasterConfig forecaster;

    friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

void validate(const ProtocolConfig& config);

/// Number of leading samples always transmitted: w+1 for the window
/// forecaster (the recurrence needs t[n] and t[n-w]), the fit window for
/// the AR forecaster (both ends fit identical coefficients from it).
std::size_t bootstrap_length(const ForecasterConfig& config);

struct Decision {
    bool sent = false;
    double value = 0.0;  // true value when sent, otherwise the shared prediction
};

/// Sensor side. The forecaster only ever observes the processed sequence:
/// the true value when it was sent, the prediction when it was suppressed.
class Encoder {
public:
    explicit Encoder(ProtocolConfig config);
    Encoder(const Encoder& other);
    Encoder& operator=(const Encoder& other);
    Encoder(Encoder&&) noexcept = default;
    Encoder& operator=(Encoder&&) noexcept = default;
    ~Encoder() = default;

    Decision step(double true_value);

    /// Prediction for the next sample, or nullopt while bootstrapping.
    [[nodiscard]] std::optional<double> prediction() const;

    [[nodiscard]] const ProtocolConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::size_t bootstrap() const noexcept { return bootstrap_; }
    [[nodiscard]] std::size_t samples_seen() const noexcept { return processed_.size(); }
    [[nodiscard]] std::size_t samples_sent() const noexcept { return sent_; }
    [[nodiscard]] const std::vector<double>& processed() const noexcept { return processed_; }

private:
    ProtocolConfig config_;
    std::size_t bootstrap_;
    std::unique_ptr<Forecaster> forecaster_;
    std::vector<double> processed_;
    std::size_t sent_ = 0;
};

/// Server side: mirrors the encoder's forecaster from the received stream.
class Decoder {
public:
    explicit Decoder(ProtocolConfig config);

    /// `received` is empty for a suppressed index. Throws Error on a
    /// suppression inside the bootstrap region (stream corruption).
    double step(std::optional<double> received);

    [[nodiscard]] std::size_t bootstrap() const noexcept { return bootstrap_; }
    [[nodiscard]] const std::vector<double>& reconstructed() const noexcept { return reconstructed_; }

private:
    ProtocolConfig config_;
    std::size_t bootstrap_;
    std::unique_ptr<Forecaster> forecaster_;
    std::vector<double> reconstructed_;
};

struct TransmissionRecord {
    std::uint64_t index = 0;
    double true_value = 0.0;
    double processed_value = 0.0;
    bool sent = false;
};

struct TransmissionLog {
    ProtocolConfig config;
    std::size_t bootstrap = 0;
    std::vector<TransmissionRecord> records;
    std::size_t samples_sent = 0;
    double sample_period = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] double sent_fraction() const noexcept;
    [[nodiscard]] std::vector<double> true_values() const;
    [[nodiscard]] std::vector<double> processed_values() const;
    [[nodiscard]] TimeSeries processed_series() const;
};

/// Drives encoder and decoder in lockstep over a reliable ordered channel.
/// Throws Error if the decoder ever disagrees with the encoder's processed
/// value (bit comparison).
TransmissionLog run_session(const TimeSeries& series, const ProtocolConfig& config);

/// CSV `index,true,processed,sent`.
void write_session_csv(const TransmissionLog& log, std::ostream& out);

// Framing. A frame payload carries up to five (u32 index, f64 value) pairs,
// 12 bytes each, so a full payload is exactly 60 bytes. On the wire each
// frame is preceded by a one-byte pair count; an end-of-batch marker (count 0
// followed by the u32 number of samples covered) lets the decoder flush
// trailing suppressions. All integers and floats are little-endian.

inline constexpr std::size_t kPairBytes = 12;
inline constexpr std::size_t kFramePayloadBytes = 60;
inline constexpr std::size_t kMaxPairsPerFrame = kFramePayloadBytes / kPairBytes;
inline constexpr std::size_t kMarkerBytes = 5;

struct FramePair {
    std::uint32_t index = 0;
    double value = 0.0;

    friend bool operator==(const FramePair&, const FramePair&) = default;
};

struct Frame {
    std::vector<FramePair> pairs;

    [[nodiscard]] std::size_t payload_bytes() const noexcept { return pairs.size() * kPairBytes; }
    friend bool operator==(const Frame&, const Frame&) = default;
};

struct FramedStream {
    std::vector<Frame> frames;
    std::uint32_t sample_count = 0;       // samples covered, sent or not
    std::size_t payload_bytes = 0;        // pairs actually sent
    std::size_t full_payload_bytes = 0;   // pairs at 100% transmission
    std::size_t wire_bytes = 0;           // payload + count bytes + end marker

    /// payload_bytes / full_payload_bytes, 0 for an empty stream.
    [[nodiscard]] double data_fraction() const noexcept;
    friend bool operator==(const FramedStream&, const FramedStream&) = default;
};

FramedStream frame_stream(const TransmissionLog& log);

std::vector<std::uint8_t> serialize(const FramedStream& stream);

/// Inverse of serialize. Throws Error on truncation, an over-long frame,
/// non-increasing indices or a missing end marker.
FramedStream deserialize(std::span<const std::uint8_t> bytes);

/// Server-side reconstruction from frames alone: index gaps are suppressed
/// samples, filled from the decoder's own predictions.
std::vector<double> reconstruct(const FramedStream& stream, const ProtocolConfig& config);

}  // namespace ambrosia
