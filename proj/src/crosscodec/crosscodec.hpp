#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"
#include "regression/model_io.hpp"

namespace hwenergy::crosscodec {

enum class DecoderScope { Reference, Optimized, Both };

std::string_view to_string(DecoderScope scope) noexcept;
DecoderScope parse_decoder_scope(std::string_view s);

struct PhaseConfig {
  int phase_id = 0;  // 1..7 for the presets, 0 for a custom assignment
  std::vector<Codec> training_codecs;
  Codec verification_codec = Codec::AV1;
  DecoderScope decoder_scope = DecoderScope::Both;

  // InvalidArgument: empty training set, duplicate codec, or the
  // verification codec among the training codecs.
  void validate() const;
  std::string label() const;  // e.g. "HEVC+VP9->AV1"
  bool operator==(const PhaseConfig&) const = default;
};

inline constexpr int kPresetCount = 7;

// 1 AVC, 2 HEVC, 3 VP9, 4 AVC+HEVC, 5 AVC+VP9, 6 AVC+HEVC+VP9, 7 HEVC+VP9;
// all verify on AV1. InvalidArgument outside 1..7.
PhaseConfig phase_preset(int phase_id, DecoderScope scope = DecoderScope::Both);

struct CalibrationParams {
  double alpha = 0.0;
  double beta = 1.0;
  bool operator==(const CalibrationParams&) const = default;
};

// Ordinary least squares for measured ≈ alpha + beta·predicted.
// Errors: LengthMismatch, TooFewSamples (< 2 pairs), ConstantPredictions.
CalibrationParams fit_calibration(std::span<const double> predicted, std::span<const double> measured);

std::vector<double> apply_calibration(const CalibrationParams& params, std::span<const double> predicted);

// One verification population (all, reference or optimized decoders).
struct VerificationGroup {
  std::string name;
  std::vector<std::string> ids;
  std::vector<double> raw_predictions;  // E_cross
  std::vector<double> calibrated;       // E_veri hat
  std::vector<double> measured;         // E_veri
  double pcc_raw = 0.0;
  double mape_raw = 0.0;
  double mape_calibrated = 0.0;
  CalibrationParams calibration;
};

struct CrossCodecReport {
  PhaseConfig phase;
  FeatureSetKind kind = FeatureSetKind::Valgrind13PE;
  Regressor regressor = Regressor::Gpr;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  // Reference and optimized decoders are reported separately under scope
  // Both; a group with no verification records is omitted.
  std::vector<VerificationGroup> groups;
};

// Training records: the phase's training codecs within the decoder scope;
// records of unrelated codecs are ignored. Verification records: the
// verification codec within the scope.
// Errors: CodecLeak (verification codec in `train`, or a training codec in
// `verify`), EmptyTrainingSet, MissingFeature, TooFewSamples,
// ConstantPredictions and propagated regression errors.
CrossCodecReport run_phase(const Dataset& train, const Dataset& verify, const PhaseConfig& phase,
                           FeatureSetKind kind, Regressor regressor, std::uint64_t seed,
                           const regression::TrainOptions& opts = {});

// Splits one corpus into the phase's training and verification datasets.
std::pair<Dataset, Dataset> split_for_phase(const Dataset& corpus, const PhaseConfig& phase);

nlohmann::json to_json(const CrossCodecReport& report);
nlohmann::json to_json(const std::vector<CrossCodecReport>& reports);

// Rows are phase x group, columns the feature sets present in `reports`;
// the MAPE block is followed by a PCC block.
std::string format_table(const std::vector<CrossCodecReport>& reports);

// phase,kind,regressor,group,id,e_veri,e_cross,e_veri_hat
std::string scatter_csv(const std::vector<CrossCodecReport>& reports);

}  // namespace hwenergy::crosscodec
