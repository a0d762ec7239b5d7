#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "regression/gpr.hpp"
#include "regression/linear.hpp"

namespace hwenergy::regression {

using EnergyModel = std::variant<LinearModel, GprModel>;

inline constexpr int kModelFormatVersion = 1;

FeatureSetKind kind_of(const EnergyModel& model) noexcept;
Regressor regressor_of(const EnergyModel& model) noexcept;

// Point estimate in joules for a raw feature row.
double predict(const EnergyModel& model, std::span<const double> raw_row);

struct TrainOptions {
  LinearOptions linear;
  GprOptions gpr;
};

EnergyModel train_model(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                        Regressor regressor, const TrainOptions& opts = {});

struct StoredModel {
  EnergyModel model;
  // Top-level keys beyond the model fields (purpose, training_codecs, seed...).
  nlohmann::json metadata = nlohmann::json::object();
};

// JSON: {format_version, regressor, kind, coefficients|gamma, intercept,
// hyper{l, sigma_f2, sigma_n2}, normalization{means, scales},
// training_inputs, dual_weights, jitter} plus the metadata keys. Doubles are
// written in shortest round-trip form, so save/load is exact.
std::string serialize_model(const EnergyModel& model,
                            const nlohmann::json& metadata = nlohmann::json::object());

// Errors: ModelFormat (bad JSON, unknown version or missing field) and any
// dimension/validation error from the model constructors.
StoredModel parse_model(std::string_view json_text);

}  // namespace hwenergy::regression
