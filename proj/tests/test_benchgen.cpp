#include <cmath>

#include "benchgen/benchgen.hpp"
#include "crosscodec/crosscodec.hpp"
#include "evaluation/metrics.hpp"
#include "ingest/dataset_io.hpp"
#include "regression/feature_matrix.hpp"
#include "regression/linear.hpp"
#include "test_support.hpp"

using namespace hwenergy;
using namespace hwenergy::benchgen;
using testing::error_of;

namespace {

GeneratorSpec one_decoder(std::uint64_t seed, int n, double noise) {
  auto spec = default_spec();
  spec.seed = seed;
  spec.noise_sigma_relative = noise;
  spec.decoders.resize(1);
  spec.decoders[0].n_bitstreams = n;
  return spec;
}

}  // namespace

TEST_CASE("generation is deterministic") {
  auto spec = default_spec();
  spec.noise_sigma_relative = 0.05;
  for (auto& d : spec.decoders) d.n_bitstreams = 20;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(ingest::write_dataset_csv(a.dataset) == ingest::write_dataset_csv(b.dataset));
  CHECK(to_json(a.truth).dump() == to_json(b.truth).dump());
  spec.seed = 43;
  CHECK(ingest::write_dataset_csv(generate(spec).dataset) != ingest::write_dataset_csv(a.dataset));
}

TEST_CASE("default corpus shape and invariants") {
  const auto c = generate(default_spec());
  std::size_t expected = 0;
  for (const auto& d : c.truth.spec.decoders) expected += static_cast<std::size_t>(d.n_bitstreams);
  CHECK(c.dataset.size() == expected);
  CHECK(c.dataset.size() == 800);
  CHECK(c.truth.records.size() == c.dataset.size());
  for (const auto& r : c.dataset.records()) {
    // Re-validates the miss-hierarchy inequalities.
    CHECK_NOTHROW(ProcessorEventVector(r.valgrind->counts()));
    const auto& v = *r.valgrind;
    CHECK(v[PeEvent::I1mr] <= v[PeEvent::Ir]);
    CHECK(v[PeEvent::ILmr] <= v[PeEvent::I1mr]);
    CHECK(v[PeEvent::D1mr] <= v[PeEvent::Dr]);
    CHECK(v[PeEvent::DLmr] <= v[PeEvent::D1mr]);
    CHECK(v[PeEvent::D1mw] <= v[PeEvent::Dw]);
    CHECK(v[PeEvent::DLmw] <= v[PeEvent::D1mw]);
    CHECK(v[PeEvent::Bcm] <= v[PeEvent::Bc]);
    CHECK(v[PeEvent::Bim] <= v[PeEvent::Bi]);
  }
}

TEST_CASE("noiseless linear law is recovered exactly") {
  const auto spec = one_decoder(1, 200, 0.0);
  const auto c = generate(spec);
  const auto td = regression::training_data(c.dataset, FeatureSetKind::Valgrind13PE, EnergyTarget::Software);
  const auto m = regression::fit_linear(td.features, td.targets);
  const auto& e = spec.decoders[0].sw_coefficients;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < kPeEventCount; ++i) {
    num += std::pow(m.coefficients[static_cast<Eigen::Index>(i)] - e[i], 2);
    den += e[i] * e[i];
  }
  CHECK(std::sqrt(num / den) <= 1e-8);
}

TEST_CASE("planted calibration is recovered from the noiseless corpus") {
  const auto c = generate(default_spec());
  const auto& truth = c.truth;
  std::vector<double> base, hw;
  for (std::size_t i = 0; i < c.dataset.size(); ++i)
    if (c.dataset[i].codec == Codec::AV1) {
      base.push_back(truth.records[i].base);
      hw.push_back(c.dataset[i].energy_hw->joules);
    }
  const auto p = crosscodec::fit_calibration(base, hw);
  CHECK(std::abs(p.alpha - 3.0) <= 1e-6);
  CHECK(std::abs(p.beta - 2.0) <= 1e-6);
}

TEST_CASE("noise level matches the half-normal expectation") {
  const auto c = generate(one_decoder(7, 2000, 0.05));
  std::vector<double> measured, planted;
  for (std::size_t i = 0; i < c.dataset.size(); ++i) {
    measured.push_back(c.dataset[i].energy_hw->joules);
    planted.push_back(c.truth.records[i].hw_noiseless);
  }
  // Relative error |E - E*| / E* has mean sigma * sqrt(2/pi).
  double sum = 0;
  for (std::size_t i = 0; i < measured.size(); ++i) sum += std::abs(measured[i] - planted[i]) / planted[i];
  const double observed = sum / static_cast<double>(measured.size());
  const double expected = 0.05 * std::sqrt(2.0 / 3.141592653589793);
  CHECK(c.truth.expected_mape_floor == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(observed - expected) <= 0.2 * expected);
  CHECK(std::abs(evaluation::mape(measured, planted) - expected) <= 0.2 * expected);
}

TEST_CASE("nonlinearity perturbs the law smoothly and stays bounded") {
  auto spec = one_decoder(2, 100, 0.0);
  spec.decoders[0].nonlinearity = 0.4;
  const auto c = generate(spec);
  bool perturbed = false;
  for (const auto& p : c.truth.records) {
    CHECK(p.multiplier >= 0.6 - 1e-12);
    CHECK(p.multiplier <= 1.4 + 1e-12);
    perturbed = perturbed || std::abs(p.multiplier - 1.0) > 0.05;
  }
  CHECK(perturbed);
}

TEST_CASE("paired decoders scale their partner's features") {
  auto spec = one_decoder(3, 16, 0.0);
  auto twin = spec.decoders[0];
  twin.decoder_name = "twin";
  twin.paired_with = spec.decoders[0].decoder_name;
  twin.feature_scale = 2.0;
  spec.decoders.push_back(twin);
  const auto c = generate(spec);
  REQUIRE(c.dataset.size() == 32);
  for (std::size_t i = 0; i < 16; ++i) {
    const auto a = c.dataset[i].valgrind->counts();
    const auto b = c.dataset[i + 16].valgrind->counts();
    for (std::size_t j = 0; j < kPeEventCount; ++j) CHECK(b[j] == 2 * a[j]);
    CHECK(c.dataset[i].sequence == c.dataset[i + 16].sequence);
  }
}

TEST_CASE("spec parsing and validation") {
  const auto parsed = parse_spec_text(R"({"seed": 5, "noise_sigma_relative": 0.1, "n_bitstreams": 10})");
  CHECK(parsed.seed == 5);
  CHECK(parsed.noise_sigma_relative == 0.1);
  for (const auto& d : parsed.decoders) CHECK(d.n_bitstreams == 10);
  CHECK(parse_spec(spec_to_json(parsed)).decoders.size() == parsed.decoders.size());
  CHECK(spec_to_json(parse_spec(spec_to_json(parsed))) == spec_to_json(parsed));

  CHECK(error_of([] { parse_spec_text(R"({"noise_sigma_relative": -0.1})"); }) == ErrorCode::InvalidSpec);
  CHECK(error_of([] { parse_spec_text(R"({"colour": 1})"); }) == ErrorCode::InvalidSpec);
  CHECK(error_of([] { parse_spec_text("[1, 2"); }) == ErrorCode::InvalidSpec);
  CHECK(error_of([] { parse_spec_text(R"({"decoders": [{"codec": "AV1", "decoder_name": "x", "paired_with": "y"}]})"); }) ==
        ErrorCode::InvalidSpec);
  CHECK(error_of([] { parse_spec_text(R"({"ranges": {"ir": [10, 1]}})"); }) == ErrorCode::InvalidSpec);
  auto bad = default_spec();
  bad.decoders[0].n_bitstreams = 0;
  CHECK(error_of([&] { generate(bad); }) == ErrorCode::InvalidSpec);
}
