#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evaluation/cross_validation.hpp"

namespace hwenergy::evaluation {

nlohmann::json to_json(const EvaluationReport& report);

struct GridCell {
  std::string decoder;
  FeatureSetKind kind = FeatureSetKind::Valgrind13PE;
  std::optional<EvaluationReport> report;
  std::string skipped_reason;  // set when report is absent
};

// Decoders x feature sets, one cross-validation per cell.
struct EvaluationGrid {
  Regressor regressor = Regressor::Gpr;
  EnergyTarget target = EnergyTarget::Hardware;
  std::uint64_t seed = 0;
  int k = 10;
  std::vector<std::string> decoders;  // first-appearance order in the dataset
  std::vector<FeatureSetKind> kinds;
  std::vector<GridCell> cells;        // row-major over decoders x kinds

  const GridCell& cell(std::size_t decoder, std::size_t kind) const {
    return cells.at(decoder * kinds.size() + kind);
  }
  // Mean MAPE of the evaluated cells in a column.
  std::optional<double> column_average(std::size_t kind) const;
};

// Cells whose records lack the feature set or target, or are too few for k
// folds, are skipped with a reason when `skip_incomplete` is set; otherwise
// the first such error is thrown.
EvaluationGrid evaluate_grid(const Dataset& dataset, const std::vector<FeatureSetKind>& kinds,
                             Regressor regressor, EnergyTarget target,
                             const CrossValidationOptions& opts, bool skip_incomplete);

nlohmann::json to_json(const EvaluationGrid& grid);

// Fixed-width table: rows are decoders plus an Average row, columns are
// feature sets, cells are MAPE percentages with two decimals.
std::string format_table(const EvaluationGrid& grid);

// "12.34%" for a fraction of 0.1234.
std::string format_percent(double fraction);

// Left-aligned first column, right-aligned others, two-space gaps.
std::string render_table(const std::vector<std::vector<std::string>>& rows);

}  // namespace hwenergy::evaluation
