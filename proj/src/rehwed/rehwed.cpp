#include "rehwed/rehwed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/error.hpp"
#include "evaluation/evaluation_report.hpp"
#include "regression/feature_matrix.hpp"

namespace hwenergy::rehwed {

using nlohmann::json;

double rehwed_score(std::span<const double> test, std::span<const double> anchor) {
  if (test.size() != anchor.size() || test.empty())
    fail(ErrorCode::LengthMismatch, "test has " + std::to_string(test.size()) + " predictions, anchor has " +
                                        std::to_string(anchor.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!(anchor[i] > 0.0))
      fail(ErrorCode::NonPositiveAnchorPrediction, "anchor prediction " + std::to_string(i) + " is not positive");
    sum += test[i] / anchor[i];
  }
  return sum / static_cast<double>(test.size());
}

JoinKey parse_join_key(std::string_view s) {
  if (s == "id") return JoinKey::Id;
  if (s == "bitstream") return JoinKey::Bitstream;
  fail(ErrorCode::InvalidArgument, "unknown join key '" + std::string(s) + "' (expected id or bitstream)");
}

std::string_view to_string(JoinKey key) noexcept { return key == JoinKey::Id ? "id" : "bitstream"; }

std::vector<ProfileRow> profile_rows(const Dataset& dataset, FeatureSetKind kind, JoinKey join) {
  dataset.require(kind, std::nullopt);
  std::vector<ProfileRow> rows;
  rows.reserve(dataset.size());
  for (const auto& r : dataset.records()) {
    ProfileRow row;
    row.key = join == JoinKey::Id ? r.id
                                  : r.sequence + "|" + std::string(hwenergy::to_string(r.class_label)) + "|qp" +
                                        std::to_string(r.qp) + "|" + std::string(hwenergy::to_string(r.condition));
    row.features = r.feature_row(kind);
    if (r.temporal) row.t_dec_sw = r.temporal->t_dec_sw;
    if (r.energy_sw) row.energy_sw = r.energy_sw->joules;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::map<std::string, const ProfileRow*> index_rows(const std::vector<ProfileRow>& rows, const std::string& side) {
  std::map<std::string, const ProfileRow*> index;
  for (const auto& r : rows)
    if (!index.emplace(r.key, &r).second) fail(ErrorCode::DuplicateId, side + " profile repeats key " + r.key);
  return index;
}

std::optional<double> mean_ratio(const std::vector<std::pair<std::optional<double>, std::optional<double>>>& pairs) {
  if (pairs.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [t, a] : pairs) {
    if (!t || !a || !(*a > 0.0)) return std::nullopt;
    sum += *t / *a;
  }
  return sum / static_cast<double>(pairs.size());
}

}  // namespace

RehwedReport compute_rehwed(const regression::EnergyModel& model, const std::vector<ProfileRow>& test,
                            const std::vector<ProfileRow>& anchor, std::string test_label,
                            std::string anchor_label) {
  const auto test_index = index_rows(test, "test");
  const auto anchor_index = index_rows(anchor, "anchor");
  for (const auto& [key, row] : test_index)
    if (!anchor_index.contains(key)) fail(ErrorCode::IdMismatch, "anchor profile is missing " + key);
  for (const auto& [key, row] : anchor_index)
    if (!test_index.contains(key)) fail(ErrorCode::IdMismatch, "test profile is missing " + key);
  if (test_index.empty()) fail(ErrorCode::IdMismatch, "profiles are empty");

  RehwedReport report;
  report.test_label = std::move(test_label);
  report.anchor_label = std::move(anchor_label);
  std::vector<double> t_pred, a_pred;
  std::vector<std::pair<std::optional<double>, std::optional<double>>> times, energies;
  for (const auto& [key, t] : test_index) {
    const auto* a = anchor_index.at(key);
    const double tp = regression::predict(model, t->features);
    const double ap = regression::predict(model, a->features);
    if (!(ap > 0.0))
      fail(ErrorCode::NonPositiveAnchorPrediction,
           "anchor prediction for " + key + " is " + std::to_string(ap) + " J");
    report.per_bitstream.push_back({key, tp, ap, tp / ap});
    t_pred.push_back(tp);
    a_pred.push_back(ap);
    times.emplace_back(t->t_dec_sw, a->t_dec_sw);
    energies.emplace_back(t->energy_sw, a->energy_sw);
  }
  report.n = report.per_bitstream.size();
  report.rehwed = rehwed_score(t_pred, a_pred);
  report.rswdt = mean_ratio(times);
  report.rswed = mean_ratio(energies);
  return report;
}

regression::StoredModel train_rehwed_model(const Dataset& train, const RehwedTrainingOptions& opts) {
  const auto subset = train.filtered(
      [&](const BitstreamRecord& r) {
        return r.decoder_kind == DecoderKind::Optimized &&
               std::find(opts.codecs.begin(), opts.codecs.end(), r.codec) != opts.codecs.end();
      },
      train.provenance());
  if (subset.empty()) fail(ErrorCode::EmptyTrainingSet, "no optimized-decoder records of the configured codecs");
  const auto data = regression::training_data(subset, opts.kind, EnergyTarget::Hardware);
  auto train_opts = opts.train;
  train_opts.gpr.seed = opts.seed;

  json codecs = json::array();
  for (auto c : opts.codecs) codecs.push_back(hwenergy::to_string(c));
  json metadata = {{"purpose", "rehwed"},
                   {"training_codecs", std::move(codecs)},
                   {"decoder_scope", "optimized"},
                   {"seed", opts.seed},
                   {"n_train", subset.size()}};
  if (!train.provenance().empty()) metadata["provenance"] = train.provenance();
  return {regression::train_model(data.features, data.targets, opts.regressor, train_opts), std::move(metadata)};
}

json to_json(const RehwedReport& report) {
  json rows = json::array();
  for (const auto& b : report.per_bitstream)
    rows.push_back({{"key", b.key},
                    {"e_cross_test", b.test_prediction},
                    {"e_cross_anchor", b.anchor_prediction},
                    {"ratio", b.ratio}});
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"anchor", report.anchor_label},
          {"test", report.test_label},
          {"n", report.n},
          {"rehwed", report.rehwed},
          {"rehwed_percent", evaluation::format_percent(report.rehwed)},
          {"rswdt", opt(report.rswdt)},
          {"rswed", opt(report.rswed)},
          {"per_bitstream", std::move(rows)}};
}

std::string format_table(const std::vector<RehwedReport>& reports) {
  std::vector<std::vector<std::string>> table{{"Anchor", "Test", "RSWDT", "RSWED", "REHWED"}};
  auto pct = [](const std::optional<double>& v) { return v ? evaluation::format_percent(*v) : std::string("n/a"); };
  for (const auto& r : reports)
    table.push_back({r.anchor_label, r.test_label, pct(r.rswdt), pct(r.rswed), evaluation::format_percent(r.rehwed)});
  return evaluation::render_table(table);
}

}  // namespace hwenergy::rehwed
