#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hwenergy {

enum class Codec { AVC, HEVC, VP9, AV1, VVC, AVM };
enum class DecoderKind { Reference, Optimized };
enum class SequenceClass { A1, A2, A3, B };
enum class Condition { RA, LB };
enum class MeasurementSetup { MSS, MSH };
enum class SeriesLabel { Active, Idle };

// Temporal: software decoding time. PerfCtc: instructions, cycles, user time.
// Valgrind13PE: the callgrind cache/branch simulation counters.
enum class FeatureSetKind { Temporal, PerfCtc, Valgrind13PE };

enum class EnergyTarget { Software, Hardware };
enum class Regressor { Linear, Gpr };

std::string_view to_string(Codec v) noexcept;
std::string_view to_string(DecoderKind v) noexcept;
std::string_view to_string(SequenceClass v) noexcept;
std::string_view to_string(Condition v) noexcept;
std::string_view to_string(MeasurementSetup v) noexcept;
std::string_view to_string(SeriesLabel v) noexcept;
std::string_view to_string(FeatureSetKind v) noexcept;
std::string_view to_string(EnergyTarget v) noexcept;
std::string_view to_string(Regressor v) noexcept;

// Parsers are case-insensitive and throw SchemaViolation on unknown values.
Codec parse_codec(std::string_view s);
DecoderKind parse_decoder_kind(std::string_view s);
SequenceClass parse_sequence_class(std::string_view s);
Condition parse_condition(std::string_view s);
SeriesLabel parse_series_label(std::string_view s);
FeatureSetKind parse_feature_set_kind(std::string_view s);
EnergyTarget parse_energy_target(std::string_view s);
Regressor parse_regressor(std::string_view s);

inline constexpr std::array<Codec, 6> kAllCodecs = {
    Codec::AVC, Codec::HEVC, Codec::VP9, Codec::AV1, Codec::VVC, Codec::AVM};
inline constexpr std::array<FeatureSetKind, 3> kAllFeatureSets = {
    FeatureSetKind::Temporal, FeatureSetKind::PerfCtc, FeatureSetKind::Valgrind13PE};

std::size_t feature_dimension(FeatureSetKind kind) noexcept;

// Table-style column heading ("Temporal", "Perf CTC", "Valgrind 13PE").
std::string_view display_name(FeatureSetKind kind) noexcept;

// Canonical flattening order for the processor-event vector.
enum class PeEvent : std::size_t {
  Ir, Dr, Dw, I1mr, D1mr, D1mw, ILmr, DLmr, DLmw, Bc, Bcm, Bi, Bim
};
inline constexpr std::size_t kPeEventCount = 13;

// Names as they appear in a callgrind `events:` header.
inline constexpr std::array<std::string_view, kPeEventCount> kCallgrindEventNames = {
    "Ir", "Dr", "Dw", "I1mr", "D1mr", "D1mw", "ILmr", "DLmr", "DLmw",
    "Bc", "Bcm", "Bi", "Bim"};

// Dataset column names for the same events.
inline constexpr std::array<std::string_view, kPeEventCount> kPeColumnNames = {
    "ir", "dr", "dw", "i1mr", "d1mr", "d1mw", "ilmr", "dlmr", "dlmw",
    "bc", "bcm", "bi", "bim"};

class ProcessorEventVector {
 public:
  using Counts = std::array<std::uint64_t, kPeEventCount>;

  ProcessorEventVector() = default;

  // Throws InvariantViolation when a miss count exceeds the access count of
  // the level feeding it.
  explicit ProcessorEventVector(const Counts& counts);

  std::uint64_t operator[](PeEvent e) const noexcept {
    return counts_[static_cast<std::size_t>(e)];
  }
  const Counts& counts() const noexcept { return counts_; }
  std::array<double, kPeEventCount> as_features() const noexcept;

  bool operator==(const ProcessorEventVector&) const = default;

 private:
  Counts counts_{};
};

struct PerfCtcFeatures {
  std::uint64_t instructions = 0;
  std::uint64_t cycles = 0;
  double user_time = 0.0;  // seconds

  void validate() const;
  bool operator==(const PerfCtcFeatures&) const = default;
};

struct TemporalFeature {
  double t_dec_sw = 0.0;  // seconds

  void validate() const;
  bool operator==(const TemporalFeature&) const = default;
};

struct EnergySample {
  double joules = 0.0;
  MeasurementSetup setup = MeasurementSetup::MSS;
  int n_repeats = 1;
  bool passed_confidence = false;

  void validate() const;
  bool operator==(const EnergySample&) const = default;
};

struct BitstreamRecord {
  std::string id;
  Codec codec = Codec::AVC;
  std::string decoder_name;
  DecoderKind decoder_kind = DecoderKind::Reference;
  std::string sequence;
  SequenceClass class_label = SequenceClass::A1;
  int qp = 0;
  Condition condition = Condition::RA;
  std::optional<TemporalFeature> temporal;
  std::optional<PerfCtcFeatures> perf;
  std::optional<ProcessorEventVector> valgrind;
  std::optional<EnergySample> energy_sw;
  std::optional<EnergySample> energy_hw;

  void validate() const;
  bool has_features(FeatureSetKind kind) const noexcept;
  bool has_target(EnergyTarget target) const noexcept;

  // Raw (unnormalized) feature row in canonical order; throws MissingFeature.
  std::vector<double> feature_row(FeatureSetKind kind) const;
  double target_joules(EnergyTarget target) const;

  bool operator==(const BitstreamRecord&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  // Validates every record and id uniqueness (DuplicateId).
  explicit Dataset(std::vector<BitstreamRecord> records, std::string provenance = {});

  const std::vector<BitstreamRecord>& records() const noexcept { return records_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const BitstreamRecord& operator[](std::size_t i) const { return records_.at(i); }

  // Returns a new dataset holding the records that satisfy pred, in order.
  template <typename Pred>
  Dataset filtered(Pred pred, std::string provenance) const {
    std::vector<BitstreamRecord> out;
    for (const auto& r : records_)
      if (pred(r)) out.push_back(r);
    return Dataset(std::move(out), std::move(provenance));
  }

  // Appends other's records; throws DuplicateId on collision.
  Dataset merged(const Dataset& other) const;

  // Throws MissingFeature naming every record lacking the feature set or target.
  void require(FeatureSetKind kind, std::optional<EnergyTarget> target) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<BitstreamRecord> records_;
  std::string provenance_;
};

struct MeasurementSeries {
  std::vector<double> values;  // joules
  SeriesLabel label = SeriesLabel::Active;
};

}  // namespace hwenergy
