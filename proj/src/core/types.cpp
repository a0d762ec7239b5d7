#include "core/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "core/error.hpp"

namespace hwenergy {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Codec, 6> kCodecNames{{{Codec::AVC, "AVC"},
                                           {Codec::HEVC, "HEVC"},
                                           {Codec::VP9, "VP9"},
                                           {Codec::AV1, "AV1"},
                                           {Codec::VVC, "VVC"},
                                           {Codec::AVM, "AVM"}}};
constexpr NameTable<DecoderKind, 2> kDecoderKindNames{
    {{DecoderKind::Reference, "reference"}, {DecoderKind::Optimized, "optimized"}}};
constexpr NameTable<SequenceClass, 4> kClassNames{{{SequenceClass::A1, "A1"},
                                                   {SequenceClass::A2, "A2"},
                                                   {SequenceClass::A3, "A3"},
                                                   {SequenceClass::B, "B"}}};
constexpr NameTable<Condition, 2> kConditionNames{
    {{Condition::RA, "RA"}, {Condition::LB, "LB"}}};
constexpr NameTable<MeasurementSetup, 2> kSetupNames{
    {{MeasurementSetup::MSS, "MSS"}, {MeasurementSetup::MSH, "MSH"}}};
constexpr NameTable<SeriesLabel, 2> kSeriesNames{
    {{SeriesLabel::Active, "active"}, {SeriesLabel::Idle, "idle"}}};
constexpr NameTable<FeatureSetKind, 3> kKindNames{{{FeatureSetKind::Temporal, "temporal"},
                                                   {FeatureSetKind::PerfCtc, "perf_ctc"},
                                                   {FeatureSetKind::Valgrind13PE, "valgrind_13pe"}}};
constexpr NameTable<EnergyTarget, 2> kTargetNames{
    {{EnergyTarget::Software, "energy_sw"}, {EnergyTarget::Hardware, "energy_hw"}}};
constexpr NameTable<Regressor, 2> kRegressorNames{
    {{Regressor::Linear, "lr"}, {Regressor::Gpr, "gpr"}}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) noexcept {
  for (const auto& [e, name] : table)
    if (e == v) return name;
  return "?";
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename E, std::size_t N>
E parse_from(const NameTable<E, N>& table, std::string_view s, std::string_view what,
             std::initializer_list<std::pair<std::string_view, E>> aliases = {}) {
  for (const auto& [e, name] : table)
    if (iequals(s, name)) return e;
  for (const auto& [alias, e] : aliases)
    if (iequals(s, alias)) return e;
  fail(ErrorCode::SchemaViolation,
       "unknown " + std::string(what) + " value '" + std::string(s) + "'");
}

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

std::string_view to_string(Codec v) noexcept { return name_of(kCodecNames, v); }
std::string_view to_string(DecoderKind v) noexcept { return name_of(kDecoderKindNames, v); }
std::string_view to_string(SequenceClass v) noexcept { return name_of(kClassNames, v); }
std::string_view to_string(Condition v) noexcept { return name_of(kConditionNames, v); }
std::string_view to_string(MeasurementSetup v) noexcept { return name_of(kSetupNames, v); }
std::string_view to_string(SeriesLabel v) noexcept { return name_of(kSeriesNames, v); }
std::string_view to_string(FeatureSetKind v) noexcept { return name_of(kKindNames, v); }
std::string_view to_string(EnergyTarget v) noexcept { return name_of(kTargetNames, v); }
std::string_view to_string(Regressor v) noexcept { return name_of(kRegressorNames, v); }

Codec parse_codec(std::string_view s) {
  return parse_from(kCodecNames, s, "codec", {{"H264", Codec::AVC}, {"H265", Codec::HEVC}});
}
DecoderKind parse_decoder_kind(std::string_view s) {
  return parse_from(kDecoderKindNames, s, "decoder_kind",
                    {{"ref", DecoderKind::Reference}, {"opt", DecoderKind::Optimized}});
}
SequenceClass parse_sequence_class(std::string_view s) {
  return parse_from(kClassNames, s, "class");
}
Condition parse_condition(std::string_view s) {
  return parse_from(kConditionNames, s, "condition");
}
SeriesLabel parse_series_label(std::string_view s) {
  return parse_from(kSeriesNames, s, "series label");
}
FeatureSetKind parse_feature_set_kind(std::string_view s) {
  return parse_from(kKindNames, s, "feature set",
                    {{"perf", FeatureSetKind::PerfCtc},
                     {"perfctc", FeatureSetKind::PerfCtc},
                     {"valgrind", FeatureSetKind::Valgrind13PE},
                     {"13pe", FeatureSetKind::Valgrind13PE}});
}
EnergyTarget parse_energy_target(std::string_view s) {
  return parse_from(kTargetNames, s, "energy target",
                    {{"sw", EnergyTarget::Software}, {"hw", EnergyTarget::Hardware}});
}
Regressor parse_regressor(std::string_view s) {
  return parse_from(kRegressorNames, s, "regressor", {{"linear", Regressor::Linear}});
}

std::size_t feature_dimension(FeatureSetKind kind) noexcept {
  switch (kind) {
    case FeatureSetKind::Temporal: return 1;
    case FeatureSetKind::PerfCtc: return 3;
    case FeatureSetKind::Valgrind13PE: return kPeEventCount;
  }
  return 0;
}

std::string_view display_name(FeatureSetKind kind) noexcept {
  switch (kind) {
    case FeatureSetKind::Temporal: return "Temporal";
    case FeatureSetKind::PerfCtc: return "Perf CTC";
    case FeatureSetKind::Valgrind13PE: return "Valgrind 13PE";
  }
  return "?";
}

ProcessorEventVector::ProcessorEventVector(const Counts& counts) : counts_(counts) {
  static constexpr std::array<std::pair<PeEvent, PeEvent>, 8> kHierarchy{{
      {PeEvent::I1mr, PeEvent::Ir},
      {PeEvent::D1mr, PeEvent::Dr},
      {PeEvent::D1mw, PeEvent::Dw},
      {PeEvent::ILmr, PeEvent::I1mr},
      {PeEvent::DLmr, PeEvent::D1mr},
      {PeEvent::DLmw, PeEvent::D1mw},
      {PeEvent::Bcm, PeEvent::Bc},
      {PeEvent::Bim, PeEvent::Bi},
  }};
  for (const auto& [miss, access] : kHierarchy) {
    if ((*this)[miss] > (*this)[access]) {
      std::ostringstream msg;
      msg << kCallgrindEventNames[static_cast<std::size_t>(miss)] << " (" << (*this)[miss]
          << ") exceeds " << kCallgrindEventNames[static_cast<std::size_t>(access)] << " ("
          << (*this)[access] << ")";
      fail(ErrorCode::InvariantViolation, msg.str());
    }
  }
}

std::array<double, kPeEventCount> ProcessorEventVector::as_features() const noexcept {
  std::array<double, kPeEventCount> out{};
  for (std::size_t i = 0; i < kPeEventCount; ++i) out[i] = static_cast<double>(counts_[i]);
  return out;
}

void PerfCtcFeatures::validate() const {
  if (!finite_nonnegative(user_time))
    fail(ErrorCode::InvariantViolation, "perf user_time must be finite and >= 0");
}

void TemporalFeature::validate() const {
  if (!finite_nonnegative(t_dec_sw))
    fail(ErrorCode::InvariantViolation, "t_dec_sw must be finite and >= 0");
}

void EnergySample::validate() const {
  if (!finite_nonnegative(joules))
    fail(ErrorCode::InvariantViolation, "energy must be finite and >= 0 J");
  if (n_repeats < 1) fail(ErrorCode::InvariantViolation, "n_repeats must be >= 1");
}

void BitstreamRecord::validate() const {
  if (id.empty()) fail(ErrorCode::InvariantViolation, "record id is empty");
  if (!temporal && !perf && !valgrind)
    fail(ErrorCode::InvariantViolation, "record '" + id + "' carries no feature set");
  try {
    if (temporal) temporal->validate();
    if (perf) perf->validate();
    if (energy_sw) energy_sw->validate();
    if (energy_hw) energy_hw->validate();
  } catch (const Error& e) {
    fail(e.code(), "record '" + id + "': " + e.what());
  }
}

bool BitstreamRecord::has_features(FeatureSetKind kind) const noexcept {
  switch (kind) {
    case FeatureSetKind::Temporal: return temporal.has_value();
    case FeatureSetKind::PerfCtc: return perf.has_value();
    case FeatureSetKind::Valgrind13PE: return valgrind.has_value();
  }
  return false;
}

bool BitstreamRecord::has_target(EnergyTarget target) const noexcept {
  return target == EnergyTarget::Software ? energy_sw.has_value() : energy_hw.has_value();
}

std::vector<double> BitstreamRecord::feature_row(FeatureSetKind kind) const {
  if (!has_features(kind))
    fail(ErrorCode::MissingFeature,
         "record '" + id + "' lacks " + std::string(to_string(kind)) + " features");
  switch (kind) {
    case FeatureSetKind::Temporal: return {temporal->t_dec_sw};
    case FeatureSetKind::PerfCtc:
      return {static_cast<double>(perf->instructions), static_cast<double>(perf->cycles),
              perf->user_time};
    case FeatureSetKind::Valgrind13PE: {
      const auto f = valgrind->as_features();
      return {f.begin(), f.end()};
    }
  }
  return {};
}

double BitstreamRecord::target_joules(EnergyTarget target) const {
  if (!has_target(target))
    fail(ErrorCode::MissingFeature,
         "record '" + id + "' lacks " + std::string(to_string(target)));
  return target == EnergyTarget::Software ? energy_sw->joules : energy_hw->joules;
}

Dataset::Dataset(std::vector<BitstreamRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records_) {
    r.validate();
    if (!seen.insert(r.id).second) fail(ErrorCode::DuplicateId, "duplicate record id '" + r.id + "'");
  }
}

Dataset Dataset::merged(const Dataset& other) const {
  std::vector<BitstreamRecord> all = records_;
  all.insert(all.end(), other.records_.begin(), other.records_.end());
  std::string prov = provenance_;
  if (!other.provenance_.empty() && other.provenance_ != provenance_)
    prov = prov.empty() ? other.provenance_ : prov + "; " + other.provenance_;
  return Dataset(std::move(all), std::move(prov));
}

void Dataset::require(FeatureSetKind kind, std::optional<EnergyTarget> target) const {
  std::vector<std::string> offenders;
  for (const auto& r : records_)
    if (!r.has_features(kind) || (target && !r.has_target(*target))) offenders.push_back(r.id);
  if (offenders.empty()) return;
  std::string msg = "records lacking " + std::string(to_string(kind));
  if (target) msg += " or " + std::string(to_string(*target));
  msg += ":";
  for (const auto& id : offenders) msg += " " + id;
  fail(ErrorCode::MissingFeature, msg);
}

}  // namespace hwenergy
