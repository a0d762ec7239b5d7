#include "crosscodec/crosscodec.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/csv.hpp"
#include "core/error.hpp"
#include "evaluation/evaluation_report.hpp"
#include "evaluation/metrics.hpp"
#include "regression/feature_matrix.hpp"

namespace hwenergy::crosscodec {

using nlohmann::json;

std::string_view to_string(DecoderScope scope) noexcept {
  switch (scope) {
    case DecoderScope::Reference: return "reference";
    case DecoderScope::Optimized: return "optimized";
    case DecoderScope::Both: return "both";
  }
  return "both";
}

DecoderScope parse_decoder_scope(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "reference" || lower == "ref") return DecoderScope::Reference;
  if (lower == "optimized" || lower == "opt") return DecoderScope::Optimized;
  if (lower == "both" || lower == "all") return DecoderScope::Both;
  fail(ErrorCode::InvalidArgument, "unknown decoder scope '" + lower + "'");
}

void PhaseConfig::validate() const {
  if (training_codecs.empty()) fail(ErrorCode::InvalidArgument, "phase has no training codecs");
  for (std::size_t i = 0; i < training_codecs.size(); ++i) {
    if (training_codecs[i] == verification_codec)
      fail(ErrorCode::InvalidArgument,
           "verification codec " + std::string(hwenergy::to_string(verification_codec)) +
               " is also a training codec");
    for (std::size_t j = 0; j < i; ++j)
      if (training_codecs[i] == training_codecs[j])
        fail(ErrorCode::InvalidArgument,
             "duplicate training codec " + std::string(hwenergy::to_string(training_codecs[i])));
  }
}

std::string PhaseConfig::label() const {
  std::string out;
  for (std::size_t i = 0; i < training_codecs.size(); ++i) {
    if (i) out += '+';
    out += hwenergy::to_string(training_codecs[i]);
  }
  return out + "->" + std::string(hwenergy::to_string(verification_codec));
}

PhaseConfig phase_preset(int phase_id, DecoderScope scope) {
  using enum Codec;
  static const std::vector<Codec> kTraining[kPresetCount] = {
      {AVC}, {HEVC}, {VP9}, {AVC, HEVC}, {AVC, VP9}, {AVC, HEVC, VP9}, {HEVC, VP9}};
  if (phase_id < 1 || phase_id > kPresetCount)
    fail(ErrorCode::InvalidArgument, "phase must be in 1.." + std::to_string(kPresetCount) + ", got " +
                                         std::to_string(phase_id));
  return {phase_id, kTraining[phase_id - 1], AV1, scope};
}

CalibrationParams fit_calibration(std::span<const double> predicted, std::span<const double> measured) {
  if (predicted.size() != measured.size())
    fail(ErrorCode::LengthMismatch, "predicted has " + std::to_string(predicted.size()) +
                                        " values, measured has " + std::to_string(measured.size()));
  const auto n = predicted.size();
  if (n < 2) fail(ErrorCode::TooFewSamples, "calibration needs at least 2 points, got " + std::to_string(n));
  double mx = 0.0, my = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += predicted[i];
    my += measured[i];
    peak = std::max(peak, std::abs(predicted[i]));
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = predicted[i] - mx;
    sxx += dx * dx;
    sxy += dx * (measured[i] - my);
  }
  const double floor = 1e-12 * peak;
  if (!(sxx > static_cast<double>(n) * floor * floor))
    fail(ErrorCode::ConstantPredictions, "cross-codec predictions are constant");
  const double beta = sxy / sxx;
  return {my - beta * mx, beta};
}

std::vector<double> apply_calibration(const CalibrationParams& params, std::span<const double> predicted) {
  std::vector<double> out(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) out[i] = params.alpha + params.beta * predicted[i];
  return out;
}

namespace {

bool in_scope(DecoderKind kind, DecoderScope scope) {
  switch (scope) {
    case DecoderScope::Reference: return kind == DecoderKind::Reference;
    case DecoderScope::Optimized: return kind == DecoderKind::Optimized;
    case DecoderScope::Both: return true;
  }
  return true;
}

bool is_training_codec(const PhaseConfig& phase, Codec c) {
  return std::find(phase.training_codecs.begin(), phase.training_codecs.end(), c) != phase.training_codecs.end();
}

VerificationGroup score_group(std::string name, const Dataset& verify, const regression::EnergyModel& model,
                              FeatureSetKind kind) {
  VerificationGroup g;
  g.name = std::move(name);
  for (const auto& r : verify.records()) {
    g.ids.push_back(r.id);
    g.raw_predictions.push_back(regression::predict(model, r.feature_row(kind)));
    g.measured.push_back(r.target_joules(EnergyTarget::Hardware));
  }
  g.calibration = fit_calibration(g.raw_predictions, g.measured);
  g.calibrated = apply_calibration(g.calibration, g.raw_predictions);
  g.pcc_raw = evaluation::pearson(g.raw_predictions, g.measured);
  g.mape_calibrated = evaluation::mape(g.measured, g.calibrated);
  try {
    g.mape_raw = evaluation::mape(g.measured, g.raw_predictions);
  } catch (const Error&) {
    g.mape_raw = std::nan("");
  }
  return g;
}

}  // namespace

std::pair<Dataset, Dataset> split_for_phase(const Dataset& corpus, const PhaseConfig& phase) {
  phase.validate();
  auto train = corpus.filtered([&](const BitstreamRecord& r) { return is_training_codec(phase, r.codec); },
                               corpus.provenance());
  auto verify = corpus.filtered([&](const BitstreamRecord& r) { return r.codec == phase.verification_codec; },
                                corpus.provenance());
  return {std::move(train), std::move(verify)};
}

CrossCodecReport run_phase(const Dataset& train, const Dataset& verify, const PhaseConfig& phase,
                           FeatureSetKind kind, Regressor regressor, std::uint64_t seed,
                           const regression::TrainOptions& opts) {
  phase.validate();
  for (const auto& r : train.records())
    if (r.codec == phase.verification_codec)
      fail(ErrorCode::CodecLeak, "training data contains verification codec " +
                                     std::string(hwenergy::to_string(r.codec)) + " (record " + r.id + ")");
  for (const auto& r : verify.records())
    if (is_training_codec(phase, r.codec))
      fail(ErrorCode::CodecLeak, "verification data contains training codec " +
                                     std::string(hwenergy::to_string(r.codec)) + " (record " + r.id + ")");

  const auto train_set = train.filtered(
      [&](const BitstreamRecord& r) {
        return is_training_codec(phase, r.codec) && in_scope(r.decoder_kind, phase.decoder_scope);
      },
      train.provenance());
  if (train_set.empty())
    fail(ErrorCode::EmptyTrainingSet, "no training records for phase " + phase.label() + " with decoder scope " +
                                          std::string(to_string(phase.decoder_scope)));
  const auto data = regression::training_data(train_set, kind, EnergyTarget::Hardware);

  auto train_opts = opts;
  train_opts.gpr.seed = seed;
  const auto model = regression::train_model(data.features, data.targets, regressor, train_opts);

  CrossCodecReport report;
  report.phase = phase;
  report.kind = kind;
  report.regressor = regressor;
  report.seed = seed;
  report.n_train = train_set.size();

  std::vector<std::pair<std::string, DecoderScope>> groups;
  if (phase.decoder_scope == DecoderScope::Both)
    groups = {{"reference", DecoderScope::Reference}, {"optimized", DecoderScope::Optimized}};
  else
    groups = {{std::string(to_string(phase.decoder_scope)), phase.decoder_scope}};

  bool any = false;
  for (const auto& [name, scope] : groups) {
    const auto subset = verify.filtered(
        [&](const BitstreamRecord& r) {
          return r.codec == phase.verification_codec && in_scope(r.decoder_kind, scope);
        },
        verify.provenance());
    if (subset.empty()) continue;
    any = true;
    subset.require(kind, EnergyTarget::Hardware);
    try {
      report.groups.push_back(score_group(name, subset, model, kind));
    } catch (const Error& e) {
      fail(e.code(), "verification group " + name + ": " + e.what());
    }
  }
  if (!any)
    fail(ErrorCode::TooFewSamples, "no " + std::string(hwenergy::to_string(phase.verification_codec)) +
                                       " verification records within decoder scope " +
                                       std::string(to_string(phase.decoder_scope)));
  return report;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const CrossCodecReport& report) {
  json training = json::array();
  for (auto c : report.phase.training_codecs) training.push_back(hwenergy::to_string(c));
  json groups = json::array();
  for (const auto& g : report.groups) {
    json bitstreams = json::array();
    for (std::size_t i = 0; i < g.ids.size(); ++i)
      bitstreams.push_back({{"id", g.ids[i]},
                            {"e_veri", g.measured[i]},
                            {"e_cross", g.raw_predictions[i]},
                            {"e_veri_hat", g.calibrated[i]}});
    groups.push_back({{"group", g.name},
                      {"n", g.ids.size()},
                      {"pcc_raw", g.pcc_raw},
                      {"mape_raw", number_or_null(g.mape_raw)},
                      {"mape_calibrated", g.mape_calibrated},
                      {"calibration", {{"alpha", g.calibration.alpha}, {"beta", g.calibration.beta}}},
                      {"bitstreams", std::move(bitstreams)}});
  }
  return {{"phase",
           {{"phase_id", report.phase.phase_id},
            {"label", report.phase.label()},
            {"training_codecs", std::move(training)},
            {"verification_codec", hwenergy::to_string(report.phase.verification_codec)},
            {"decoder_scope", to_string(report.phase.decoder_scope)}}},
          {"kind", hwenergy::to_string(report.kind)},
          {"regressor", hwenergy::to_string(report.regressor)},
          {"seed", report.seed},
          {"n_train", report.n_train},
          {"groups", std::move(groups)}};
}

json to_json(const std::vector<CrossCodecReport>& reports) {
  json out = json::array();
  for (const auto& r : reports) out.push_back(to_json(r));
  return out;
}

namespace {

std::string row_label(const CrossCodecReport& r, const std::string& group) {
  std::string head = r.phase.phase_id > 0 ? "Phase " + std::to_string(r.phase.phase_id) : r.phase.label();
  const std::string suffix = group == "reference" ? " Ref." : group == "optimized" ? " Opt." : "";
  return head + " " + std::string(hwenergy::to_string(r.phase.verification_codec)) + suffix;
}

}  // namespace

std::string format_table(const std::vector<CrossCodecReport>& reports) {
  std::vector<FeatureSetKind> kinds;
  std::vector<std::string> rows;
  // (row, kind) -> group
  std::map<std::pair<std::string, FeatureSetKind>, const VerificationGroup*> cells;
  for (const auto& r : reports) {
    if (std::find(kinds.begin(), kinds.end(), r.kind) == kinds.end()) kinds.push_back(r.kind);
    for (const auto& g : r.groups) {
      const auto label = row_label(r, g.name);
      if (std::find(rows.begin(), rows.end(), label) == rows.end()) rows.push_back(label);
      cells[{label, r.kind}] = &g;
    }
  }
  std::sort(kinds.begin(), kinds.end());

  std::string out;
  for (const bool pcc : {false, true}) {
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header{pcc ? "PCC (raw)" : "MAPE (calibrated)"};
    for (auto k : kinds) header.emplace_back(display_name(k));
    table.push_back(std::move(header));
    for (const auto& label : rows) {
      std::vector<std::string> line{label};
      for (auto k : kinds) {
        const auto it = cells.find({label, k});
        if (it == cells.end()) {
          line.emplace_back("n/a");
        } else if (pcc) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.4f", it->second->pcc_raw);
          line.emplace_back(buf);
        } else {
          line.push_back(evaluation::format_percent(it->second->mape_calibrated));
        }
      }
      table.push_back(std::move(line));
    }
    if (pcc) out += '\n';
    out += evaluation::render_table(table);
  }
  return out;
}

std::string scatter_csv(const std::vector<CrossCodecReport>& reports) {
  std::string out = "phase,kind,regressor,group,id,e_veri,e_cross,e_veri_hat\n";
  for (const auto& r : reports)
    for (const auto& g : r.groups)
      for (std::size_t i = 0; i < g.ids.size(); ++i) {
        out += (r.phase.phase_id > 0 ? std::to_string(r.phase.phase_id) : text::csv_escape(r.phase.label())) + ',';
        out += std::string(hwenergy::to_string(r.kind)) + ',' + std::string(hwenergy::to_string(r.regressor)) + ',';
        out += g.name + ',' + text::csv_escape(g.ids[i]) + ',';
        out += text::format_double(g.measured[i]) + ',' + text::format_double(g.raw_predictions[i]) + ',' +
               text::format_double(g.calibrated[i]) + '\n';
      }
  return out;
}

}  // namespace hwenergy::crosscodec
