#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"
#include "regression/model_io.hpp"

namespace hwenergy::rehwed {

// Mean of the per-bitstream ratios test/anchor, as a fraction.
// Errors: LengthMismatch (unequal or empty), NonPositiveAnchorPrediction.
double rehwed_score(std::span<const double> test, std::span<const double> anchor);

// How test and anchor rows are paired: by record id, or by the bitstream
// itself (sequence, class, qp, condition) when the two decoders' records
// carry different ids.
enum class JoinKey { Id, Bitstream };

JoinKey parse_join_key(std::string_view s);
std::string_view to_string(JoinKey key) noexcept;

struct ProfileRow {
  std::string key;
  std::vector<double> features;    // raw feature row
  std::optional<double> t_dec_sw;  // for the RSWDT pass-through
  std::optional<double> energy_sw; // for the RSWED pass-through
};

// Errors: MissingFeature listing the records without the feature set.
std::vector<ProfileRow> profile_rows(const Dataset& dataset, FeatureSetKind kind, JoinKey join = JoinKey::Id);

struct BitstreamRatio {
  std::string key;
  double test_prediction = 0.0;
  double anchor_prediction = 0.0;
  double ratio = 0.0;
};

struct RehwedReport {
  std::string anchor_label;
  std::string test_label;
  std::vector<BitstreamRatio> per_bitstream;  // sorted by key
  double rehwed = 0.0;                        // fraction; 2.0 prints as 200.00%
  std::size_t n = 0;
  std::optional<double> rswdt;  // mean test/anchor software decoding time ratio
  std::optional<double> rswed;  // mean test/anchor software energy ratio
};

// Predicts every row with `model` and averages the per-bitstream ratios over
// the id-sorted join of both sides.
// Errors: IdMismatch (key sets differ, naming a missing key), DuplicateId,
// DimensionMismatch (rows do not fit the model), NonPositiveAnchorPrediction.
RehwedReport compute_rehwed(const regression::EnergyModel& model, const std::vector<ProfileRow>& test,
                            const std::vector<ProfileRow>& anchor, std::string test_label = "test",
                            std::string anchor_label = "anchor");

struct RehwedTrainingOptions {
  std::vector<Codec> codecs = {Codec::HEVC, Codec::VP9, Codec::AV1};
  FeatureSetKind kind = FeatureSetKind::Valgrind13PE;
  Regressor regressor = Regressor::Gpr;
  std::uint64_t seed = 42;
  regression::TrainOptions train;
};

// Fits the pretrained model on the optimized-decoder records of the
// configured codecs (hardware energy target). The returned metadata holds
// purpose, training_codecs, decoder_scope, seed and n_train.
// Errors: EmptyTrainingSet, MissingFeature and propagated regression errors.
regression::StoredModel train_rehwed_model(const Dataset& train, const RehwedTrainingOptions& opts = {});

nlohmann::json to_json(const RehwedReport& report);

// Anchor / Test / RSWDT / RSWED / REHWED with two-decimal percentages.
std::string format_table(const std::vector<RehwedReport>& reports);

}  // namespace hwenergy::rehwed
