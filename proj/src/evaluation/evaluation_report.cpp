#include "evaluation/evaluation_report.hpp"

#include <algorithm>
#include <cstdio>

#include "core/error.hpp"

namespace hwenergy::evaluation {

using nlohmann::json;

json to_json(const EvaluationReport& report) {
  json folds = json::array();
  for (const auto& f : report.per_fold)
    folds.push_back({{"fold_index", f.fold_index}, {"mape", f.mape}, {"n_samples", f.n_samples}});
  json preds = json::array();
  for (const auto& p : report.predictions)
    preds.push_back({{"id", p.id}, {"fold_index", p.fold_index}, {"measured", p.measured},
                     {"predicted", p.predicted}});
  return {{"regressor", to_string(report.regressor)},
          {"kind", to_string(report.kind)},
          {"target", to_string(report.target)},
          {"seed", report.seed},
          {"k", report.k},
          {"mape", report.mape},
          {"pcc", report.pcc ? json(*report.pcc) : json(nullptr)},
          {"per_fold", std::move(folds)},
          {"predictions", std::move(preds)}};
}

std::optional<double> EvaluationGrid::column_average(std::size_t kind) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t d = 0; d < decoders.size(); ++d) {
    const auto& c = cell(d, kind);
    if (c.report) {
      sum += c.report->mape;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

EvaluationGrid evaluate_grid(const Dataset& dataset, const std::vector<FeatureSetKind>& kinds,
                             Regressor regressor, EnergyTarget target,
                             const CrossValidationOptions& opts, bool skip_incomplete) {
  if (dataset.empty()) fail(ErrorCode::EmptyTrainingSet, "dataset is empty");
  if (kinds.empty()) fail(ErrorCode::InvalidArgument, "no feature sets requested");
  EvaluationGrid grid;
  grid.regressor = regressor;
  grid.target = target;
  grid.seed = opts.seed;
  grid.k = opts.k;
  grid.kinds = kinds;
  for (const auto& r : dataset.records())
    if (std::find(grid.decoders.begin(), grid.decoders.end(), r.decoder_name) == grid.decoders.end())
      grid.decoders.push_back(r.decoder_name);

  for (const auto& decoder : grid.decoders) {
    const auto subset = dataset.filtered([&](const BitstreamRecord& r) { return r.decoder_name == decoder; },
                                         dataset.provenance());
    for (auto kind : kinds) {
      GridCell cell{decoder, kind, std::nullopt, {}};
      try {
        cell.report = cross_validate(subset, kind, regressor, target, opts);
      } catch (const Error& e) {
        const bool incomplete = e.code() == ErrorCode::MissingFeature || e.code() == ErrorCode::TooFewSamples;
        if (!skip_incomplete || !incomplete)
          fail(e.code(), "decoder " + decoder + ", " + std::string(to_string(kind)) + ": " + e.what());
        cell.skipped_reason = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

json to_json(const EvaluationGrid& grid) {
  json cells = json::array();
  for (const auto& c : grid.cells) {
    json j = {{"decoder", c.decoder}, {"kind", to_string(c.kind)}};
    if (c.report) {
      j["report"] = to_json(*c.report);
    } else {
      j["skipped"] = c.skipped_reason;
    }
    cells.push_back(std::move(j));
  }
  json averages = json::object();
  for (std::size_t k = 0; k < grid.kinds.size(); ++k) {
    const auto avg = grid.column_average(k);
    averages[std::string(to_string(grid.kinds[k]))] = avg ? json(*avg) : json(nullptr);
  }
  json kinds = json::array();
  for (auto k : grid.kinds) kinds.push_back(to_string(k));
  return {{"regressor", to_string(grid.regressor)},
          {"target", to_string(grid.target)},
          {"seed", grid.seed},
          {"k", grid.k},
          {"decoders", grid.decoders},
          {"kinds", std::move(kinds)},
          {"cells", std::move(cells)},
          {"average_mape", std::move(averages)}};
}

std::string format_percent(double fraction) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (widths.size() <= c) widths.push_back(0);
      widths[c] = std::max(widths[c], row[c].size());
    }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const auto& cell = rows[r][c];
      const std::string pad(widths[c] - cell.size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? cell + pad : pad + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-') + '\n';
    }
  }
  return out;
}

std::string format_table(const EvaluationGrid& grid) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Decoder"};
  for (auto k : grid.kinds) header.emplace_back(display_name(k));
  rows.push_back(std::move(header));
  for (std::size_t d = 0; d < grid.decoders.size(); ++d) {
    std::vector<std::string> row{grid.decoders[d]};
    for (std::size_t k = 0; k < grid.kinds.size(); ++k) {
      const auto& c = grid.cell(d, k);
      row.push_back(c.report ? format_percent(c.report->mape) : "n/a");
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> avg{"Average"};
  for (std::size_t k = 0; k < grid.kinds.size(); ++k) {
    const auto a = grid.column_average(k);
    avg.push_back(a ? format_percent(*a) : "n/a");
  }
  rows.push_back(std::move(avg));
  return "MAPE, " + std::string(to_string(grid.regressor)) + ", " + std::string(to_string(grid.target)) +
         ", " + std::to_string(grid.k) + "-fold CV, seed " + std::to_string(grid.seed) + "\n" +
         render_table(rows);
}

}  // namespace hwenergy::evaluation
