#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"

namespace hwenergy::benchgen {

using PeCoefficients = std::array<double, kPeEventCount>;

// One decoder of one codec. Its records use the shared hardware law scaled
// by (hw_offset + hw_scale * law) and a decoder-specific software law.
struct DecoderSpec {
  Codec codec = Codec::AV1;
  std::string decoder_name;
  DecoderKind decoder_kind = DecoderKind::Optimized;
  int n_bitstreams = 100;
  double hw_offset = 0.0;      // alpha*, joules
  double hw_scale = 1.0;       // beta*
  double nonlinearity = 0.0;   // amplitude A of the multiplier 1 + A sin(2 pi s), 0 <= A < 1
  PeCoefficients sw_coefficients{};  // e*, joules per event
  // Copies the bitstreams of the named decoder with every feature multiplied
  // by feature_scale instead of drawing new ones.
  std::optional<std::string> paired_with;
  double feature_scale = 1.0;
};

// Log-uniform draw ranges. `ir` is absolute; every other column is a factor
// of its parent column (dr, dw, i1mr, bc, bi: of ir; d1mr: of dr; d1mw: of dw;
// ilmr: of i1mr; dlmr: of d1mr; dlmw: of d1mw; bcm: of bc; bim: of bi).
using FeatureRanges = std::array<std::pair<double, double>, kPeEventCount>;

struct GeneratorSpec {
  std::uint64_t seed = 42;
  double noise_sigma_relative = 0.0;
  PeCoefficients base_law{};  // shared hardware law, joules per event
  FeatureRanges ranges{};
  std::vector<DecoderSpec> decoders;

  // Errors: InvalidSpec naming the offending field.
  void validate() const;
};

// AVC/HEVC/VP9 with one reference and one optimized decoder each, and AV1
// (libaom, dav1d) whose hardware law is 3 J + 2 x the shared law. Noiseless.
GeneratorSpec default_spec();
PeCoefficients default_base_law();
FeatureRanges default_ranges();

// JSON keys: seed, noise_sigma_relative, n_bitstreams (default for every
// decoder), base_law, ranges{ir: [lo, hi], ...}, decoders[{codec,
// decoder_name, decoder_kind, n_bitstreams, hw_offset, hw_scale,
// nonlinearity, sw_coefficients, paired_with, feature_scale}]. Absent keys
// take the default_spec() values; when `decoders` is absent the default
// decoder list is used. Unknown keys are rejected with InvalidSpec.
GeneratorSpec parse_spec(const nlohmann::json& j);
GeneratorSpec parse_spec_text(std::string_view json_text);
nlohmann::json spec_to_json(const GeneratorSpec& spec);

struct PlantedValues {
  std::string id;
  double multiplier = 1.0;   // 1 + A sin(2 pi s)
  double base = 0.0;         // shared law applied to the features, times the multiplier
  double hw_noiseless = 0.0; // hw_offset + hw_scale * base
  double sw_noiseless = 0.0; // sw law applied to the features, times the multiplier
};

struct GroundTruth {
  GeneratorSpec spec;
  // Expected MAPE of the planted law against its own noisy data,
  // sigma * sqrt(2 / pi).
  double expected_mape_floor = 0.0;
  std::vector<PlantedValues> records;  // dataset order
};

nlohmann::json to_json(const GroundTruth& truth);

struct Corpus {
  Dataset dataset;
  GroundTruth truth;
};

// Pure function of the spec. Errors: InvalidSpec.
Corpus generate(const GeneratorSpec& spec);

}  // namespace hwenergy::benchgen
