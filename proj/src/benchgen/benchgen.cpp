#include "benchgen/benchgen.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "core/error.hpp"
#include "core/random.hpp"

namespace hwenergy::benchgen {

using nlohmann::json;

namespace {

// Column whose count each column's range factor multiplies; ir has none.
constexpr std::array<int, kPeEventCount> kParent = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 0, 9, 0, 11};
// Columns bounded by their parent (miss <= access).
constexpr std::array<bool, kPeEventCount> kBounded = {false, false, false, true, true, true, true,
                                                      true,  true,  false, true, false, true};

constexpr std::array<int, 4> kQps = {22, 27, 32, 37};
constexpr std::array<SequenceClass, 4> kClasses = {SequenceClass::A1, SequenceClass::A2, SequenceClass::A3,
                                                   SequenceClass::B};

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::InvalidSpec, msg); }

bool finite(double v) { return std::isfinite(v); }

PeCoefficients scaled(const PeCoefficients& c, double s) {
  PeCoefficients out{};
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] * s;
  return out;
}

}  // namespace

PeCoefficients default_base_law() {
  return {1e-9, 6e-10, 8e-10, 1.5e-8, 1.2e-8, 1e-8, 6e-8, 6e-8, 5e-8, 5e-10, 1.5e-8, 8e-10, 1.5e-8};
}

FeatureRanges default_ranges() {
  return {{{2e7, 2e9},
           {0.25, 0.45},
           {0.1, 0.25},
           {1e-4, 5e-3},
           {5e-3, 5e-2},
           {5e-3, 5e-2},
           {0.01, 0.2},
           {0.02, 0.3},
           {0.02, 0.3},
           {0.08, 0.2},
           {0.01, 0.1},
           {0.002, 0.02},
           {0.02, 0.3}}};
}

GeneratorSpec default_spec() {
  GeneratorSpec spec;
  spec.base_law = default_base_law();
  spec.ranges = default_ranges();
  const std::array<std::tuple<Codec, const char*, const char*>, 4> codecs = {{
      {Codec::AVC, "JM", "FFmpeg-h264"},
      {Codec::HEVC, "HM", "FFmpeg-hevc"},
      {Codec::VP9, "libvpx-vp9", "FFmpeg-vp9"},
      {Codec::AV1, "libaom", "dav1d"},
  }};
  for (const auto& [codec, ref, opt] : codecs) {
    for (const auto kind : {DecoderKind::Reference, DecoderKind::Optimized}) {
      DecoderSpec d;
      d.codec = codec;
      d.decoder_name = kind == DecoderKind::Reference ? ref : opt;
      d.decoder_kind = kind;
      if (codec == Codec::AV1) {
        d.hw_offset = 3.0;
        d.hw_scale = 2.0;
      }
      d.sw_coefficients = scaled(spec.base_law, kind == DecoderKind::Reference ? 4.0 : 3.0);
      spec.decoders.push_back(std::move(d));
    }
  }
  return spec;
}

void GeneratorSpec::validate() const {
  if (!finite(noise_sigma_relative) || noise_sigma_relative < 0.0)
    invalid("noise_sigma_relative must be a finite value >= 0");
  for (std::size_t i = 0; i < kPeEventCount; ++i) {
    const std::string col(kPeColumnNames[i]);
    if (!finite(base_law[i])) invalid("base_law." + col + " must be finite");
    const auto [lo, hi] = ranges[i];
    if (!finite(lo) || !finite(hi) || lo <= 0.0 || hi < lo)
      invalid("ranges." + col + " must satisfy 0 < lo <= hi");
    if (kBounded[i] && hi > 1.0) invalid("ranges." + col + " is a miss ratio and must not exceed 1");
  }
  if (decoders.empty()) invalid("decoders must not be empty");
  std::map<std::string, const DecoderSpec*> by_name;
  for (const auto& d : decoders) {
    if (d.decoder_name.empty()) invalid("decoder_name must not be empty");
    if (!by_name.emplace(d.decoder_name, &d).second) invalid("duplicate decoder_name " + d.decoder_name);
  }
  for (const auto& d : decoders) {
    const std::string where = "decoder " + d.decoder_name + ": ";
    if (d.n_bitstreams < 1) invalid(where + "n_bitstreams must be >= 1");
    if (!finite(d.hw_offset) || !finite(d.hw_scale)) invalid(where + "hw_offset and hw_scale must be finite");
    if (!finite(d.nonlinearity) || d.nonlinearity < 0.0 || d.nonlinearity >= 1.0)
      invalid(where + "nonlinearity must be in [0, 1)");
    for (double c : d.sw_coefficients)
      if (!finite(c)) invalid(where + "sw_coefficients must be finite");
    if (!finite(d.feature_scale) || d.feature_scale <= 0.0) invalid(where + "feature_scale must be > 0");
    if (d.paired_with) {
      const auto it = by_name.find(*d.paired_with);
      if (it == by_name.end()) invalid(where + "paired_with names unknown decoder " + *d.paired_with);
      if (it->second == &d) invalid(where + "cannot be paired with itself");
      if (it->second->paired_with) invalid(where + "paired_with must name an unpaired decoder");
      if (it->second->n_bitstreams != d.n_bitstreams)
        invalid(where + "n_bitstreams must equal that of " + *d.paired_with);
    }
  }
}

namespace {

const std::set<std::string> kSpecKeys = {"seed", "noise_sigma_relative", "n_bitstreams", "base_law", "ranges",
                                         "decoders"};
const std::set<std::string> kDecoderKeys = {"codec",        "decoder_name",    "decoder_kind", "n_bitstreams",
                                            "hw_offset",    "hw_scale",        "nonlinearity", "sw_coefficients",
                                            "paired_with", "feature_scale"};

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) invalid("unknown key '" + key + "' in " + where);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) invalid(where + " must be a number");
  return j.get<double>();
}

PeCoefficients coefficients(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != kPeEventCount)
    invalid(where + " must be an array of " + std::to_string(kPeEventCount) + " numbers");
  PeCoefficients out{};
  for (std::size_t i = 0; i < kPeEventCount; ++i) out[i] = number(j[i], where);
  return out;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) invalid(where + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) invalid(where + " is out of range");
  return static_cast<int>(v);
}

std::string string_field(const json& j, const std::string& where) {
  if (!j.is_string()) invalid(where + " must be a string");
  return j.get<std::string>();
}

}  // namespace

GeneratorSpec parse_spec(const json& j) {
  if (!j.is_object()) invalid("generator spec must be a JSON object");
  reject_unknown(j, kSpecKeys, "generator spec");
  auto spec = default_spec();
  if (j.contains("seed")) {
    const auto& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      invalid("seed must be a nonnegative integer");
    spec.seed = s.get<std::uint64_t>();
  }
  if (j.contains("noise_sigma_relative")) spec.noise_sigma_relative = number(j["noise_sigma_relative"], "noise_sigma_relative");
  if (j.contains("base_law")) spec.base_law = coefficients(j["base_law"], "base_law");
  if (j.contains("ranges")) {
    const auto& r = j["ranges"];
    if (!r.is_object()) invalid("ranges must be an object");
    for (const auto& [key, value] : r.items()) {
      std::size_t idx = kPeEventCount;
      for (std::size_t i = 0; i < kPeEventCount; ++i)
        if (kPeColumnNames[i] == key) idx = i;
      if (idx == kPeEventCount) invalid("unknown key '" + key + "' in ranges");
      if (!value.is_array() || value.size() != 2) invalid("ranges." + key + " must be [lo, hi]");
      spec.ranges[idx] = {number(value[0], "ranges." + key), number(value[1], "ranges." + key)};
    }
  }
  std::optional<int> default_n;
  if (j.contains("n_bitstreams")) default_n = integer(j["n_bitstreams"], "n_bitstreams");

  if (j.contains("decoders")) {
    const auto& list = j["decoders"];
    if (!list.is_array()) invalid("decoders must be an array");
    spec.decoders.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& e = list[i];
      const std::string where = "decoders[" + std::to_string(i) + "]";
      if (!e.is_object()) invalid(where + " must be an object");
      reject_unknown(e, kDecoderKeys, where);
      DecoderSpec d;
      try {
        if (!e.contains("codec")) invalid(where + ".codec is required");
        d.codec = parse_codec(string_field(e["codec"], where + ".codec"));
        if (e.contains("decoder_kind"))
          d.decoder_kind = parse_decoder_kind(string_field(e["decoder_kind"], where + ".decoder_kind"));
      } catch (const Error& err) {
        if (err.code() == ErrorCode::InvalidSpec) throw;
        invalid(where + ": " + err.what());
      }
      d.decoder_name = e.contains("decoder_name") ? string_field(e["decoder_name"], where + ".decoder_name")
                                                  : std::string(to_string(d.codec)) + "-" +
                                                        std::string(to_string(d.decoder_kind));
      if (default_n) d.n_bitstreams = *default_n;
      if (e.contains("n_bitstreams")) d.n_bitstreams = integer(e["n_bitstreams"], where + ".n_bitstreams");
      if (e.contains("hw_offset")) d.hw_offset = number(e["hw_offset"], where + ".hw_offset");
      if (e.contains("hw_scale")) d.hw_scale = number(e["hw_scale"], where + ".hw_scale");
      if (e.contains("nonlinearity")) d.nonlinearity = number(e["nonlinearity"], where + ".nonlinearity");
      d.sw_coefficients = e.contains("sw_coefficients")
                              ? coefficients(e["sw_coefficients"], where + ".sw_coefficients")
                              : scaled(spec.base_law, d.decoder_kind == DecoderKind::Reference ? 4.0 : 3.0);
      if (e.contains("paired_with")) d.paired_with = string_field(e["paired_with"], where + ".paired_with");
      if (e.contains("feature_scale")) d.feature_scale = number(e["feature_scale"], where + ".feature_scale");
      spec.decoders.push_back(std::move(d));
    }
  } else {
    for (auto& d : spec.decoders) {
      if (default_n) d.n_bitstreams = *default_n;
      d.sw_coefficients = scaled(spec.base_law, d.decoder_kind == DecoderKind::Reference ? 4.0 : 3.0);
    }
  }
  spec.validate();
  return spec;
}

GeneratorSpec parse_spec_text(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    invalid(std::string("generator spec is not valid JSON: ") + e.what());
  }
  return parse_spec(j);
}

json spec_to_json(const GeneratorSpec& spec) {
  json ranges = json::object();
  for (std::size_t i = 0; i < kPeEventCount; ++i)
    ranges[std::string(kPeColumnNames[i])] = {spec.ranges[i].first, spec.ranges[i].second};
  json decoders = json::array();
  for (const auto& d : spec.decoders) {
    json e = {{"codec", to_string(d.codec)},
              {"decoder_name", d.decoder_name},
              {"decoder_kind", to_string(d.decoder_kind)},
              {"n_bitstreams", d.n_bitstreams},
              {"hw_offset", d.hw_offset},
              {"hw_scale", d.hw_scale},
              {"nonlinearity", d.nonlinearity},
              {"sw_coefficients", d.sw_coefficients},
              {"feature_scale", d.feature_scale}};
    if (d.paired_with) e["paired_with"] = *d.paired_with;
    decoders.push_back(std::move(e));
  }
  return {{"seed", spec.seed},
          {"noise_sigma_relative", spec.noise_sigma_relative},
          {"base_law", spec.base_law},
          {"ranges", std::move(ranges)},
          {"decoders", std::move(decoders)}};
}

json to_json(const GroundTruth& truth) {
  json records = json::array();
  for (const auto& r : truth.records)
    records.push_back({{"id", r.id},
                       {"multiplier", r.multiplier},
                       {"base", r.base},
                       {"hw_noiseless", r.hw_noiseless},
                       {"sw_noiseless", r.sw_noiseless}});
  return {{"spec", spec_to_json(truth.spec)},
          {"expected_mape_floor", truth.expected_mape_floor},
          {"records", std::move(records)}};
}

namespace {

struct DrawnFeatures {
  ProcessorEventVector::Counts counts{};
  std::uint64_t instructions = 0;
  std::uint64_t cycles = 0;
  double user_time = 0.0;
  double t_dec_sw = 0.0;
};

constexpr double kClockHz = 3e9;

DrawnFeatures draw_features(const FeatureRanges& ranges, Rng& rng) {
  DrawnFeatures f;
  for (std::size_t i = 0; i < kPeEventCount; ++i) {
    const auto [lo, hi] = ranges[i];
    const double v = rng.log_uniform(lo, hi);
    const double raw = kParent[i] < 0 ? v : v * static_cast<double>(f.counts[static_cast<std::size_t>(kParent[i])]);
    f.counts[i] = static_cast<std::uint64_t>(std::llround(raw));
  }
  const double ir = static_cast<double>(f.counts[0]);
  f.instructions = static_cast<std::uint64_t>(std::llround(ir * rng.uniform(0.98, 1.02)));
  f.cycles = static_cast<std::uint64_t>(std::llround(static_cast<double>(f.instructions) * rng.log_uniform(0.35, 1.2)));
  f.user_time = static_cast<double>(f.cycles) / kClockHz * rng.uniform(0.97, 1.03);
  f.t_dec_sw = f.user_time * rng.uniform(1.0, 1.05);
  return f;
}

DrawnFeatures scale_features(const DrawnFeatures& src, double s) {
  DrawnFeatures f;
  auto round_scaled = [s](std::uint64_t v) {
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(v) * s));
  };
  for (std::size_t i = 0; i < kPeEventCount; ++i) f.counts[i] = round_scaled(src.counts[i]);
  f.instructions = round_scaled(src.instructions);
  f.cycles = round_scaled(src.cycles);
  f.user_time = src.user_time * s;
  f.t_dec_sw = src.t_dec_sw * s;
  return f;
}

double dot(const PeCoefficients& c, const ProcessorEventVector::Counts& x) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kPeEventCount; ++i) sum += c[i] * static_cast<double>(x[i]);
  return sum;
}

}  // namespace

Corpus generate(const GeneratorSpec& spec) {
  spec.validate();
  const auto& decoders = spec.decoders;
  std::vector<std::vector<DrawnFeatures>> features(decoders.size());
  std::map<std::string, std::size_t> index_of;
  for (std::size_t d = 0; d < decoders.size(); ++d) index_of[decoders[d].decoder_name] = d;

  // Per-decoder streams keep each decoder's draws independent of the others.
  std::vector<Rng> rngs;
  for (std::size_t d = 0; d < decoders.size(); ++d) rngs.emplace_back(derive_seed(spec.seed, d));
  for (std::size_t d = 0; d < decoders.size(); ++d) {
    if (decoders[d].paired_with) continue;
    for (int b = 0; b < decoders[d].n_bitstreams; ++b) features[d].push_back(draw_features(spec.ranges, rngs[d]));
  }
  for (std::size_t d = 0; d < decoders.size(); ++d) {
    if (!decoders[d].paired_with) continue;
    for (const auto& src : features[index_of.at(*decoders[d].paired_with)])
      features[d].push_back(scale_features(src, decoders[d].feature_scale));
  }

  const double ir_lo = std::log(spec.ranges[0].first);
  const double ir_span = std::log(spec.ranges[0].second) - ir_lo;
  auto noise_factor = [&](Rng& rng) { return std::max(1.0 + spec.noise_sigma_relative * rng.normal(), 1e-3); };

  Corpus corpus;
  corpus.truth.spec = spec;
  corpus.truth.expected_mape_floor = spec.noise_sigma_relative * std::sqrt(2.0 / std::numbers::pi);
  std::vector<BitstreamRecord> records;
  for (std::size_t d = 0; d < decoders.size(); ++d) {
    const auto& dec = decoders[d];
    for (int b = 0; b < dec.n_bitstreams; ++b) {
      const auto& f = features[d][static_cast<std::size_t>(b)];
      BitstreamRecord r;
      r.codec = dec.codec;
      r.decoder_name = dec.decoder_name;
      r.decoder_kind = dec.decoder_kind;
      const int seq = b / 8;
      char seq_name[32];
      std::snprintf(seq_name, sizeof seq_name, "seq_%03d", seq);
      r.sequence = seq_name;
      r.class_label = kClasses[static_cast<std::size_t>(seq) % kClasses.size()];
      r.qp = kQps[static_cast<std::size_t>(b) % kQps.size()];
      r.condition = (b / 4) % 2 == 0 ? Condition::RA : Condition::LB;
      r.id = dec.decoder_name + "_" + r.sequence + "_qp" + std::to_string(r.qp) + "_" +
             std::string(to_string(r.condition));
      r.temporal = TemporalFeature{f.t_dec_sw};
      r.perf = PerfCtcFeatures{f.instructions, f.cycles, f.user_time};
      r.valgrind = ProcessorEventVector(f.counts);

      const double s = ir_span > 0.0 ? (std::log(static_cast<double>(f.counts[0])) - ir_lo) / ir_span : 0.0;
      PlantedValues p;
      p.id = r.id;
      p.multiplier = 1.0 + dec.nonlinearity * std::sin(2.0 * std::numbers::pi * s);
      p.base = dot(spec.base_law, f.counts) * p.multiplier;
      p.hw_noiseless = dec.hw_offset + dec.hw_scale * p.base;
      p.sw_noiseless = dot(dec.sw_coefficients, f.counts) * p.multiplier;
      const double sw_noise = noise_factor(rngs[d]);
      const double hw_noise = noise_factor(rngs[d]);
      r.energy_sw = EnergySample{p.sw_noiseless * sw_noise, MeasurementSetup::MSS, 1, true};
      r.energy_hw = EnergySample{p.hw_noiseless * hw_noise, MeasurementSetup::MSH, 1, true};
      if (!(r.energy_hw->joules >= 0.0) || !(r.energy_sw->joules >= 0.0))
        invalid("decoder " + dec.decoder_name + " produces negative energy; check hw_offset and coefficients");
      records.push_back(std::move(r));
      corpus.truth.records.push_back(std::move(p));
    }
  }
  corpus.dataset = Dataset(std::move(records), "benchgen seed=" + std::to_string(spec.seed));
  return corpus;
}

}  // namespace hwenergy::benchgen
