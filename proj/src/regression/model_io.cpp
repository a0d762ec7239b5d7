#include "regression/model_io.hpp"

#include <set>

#include "core/error.hpp"

namespace hwenergy::regression {
namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return a;
}

json to_json(const Normalization& n) { return {{"means", to_json(n.means)}, {"scales", to_json(n.scales)}}; }

const json& need(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::ModelFormat, std::string("model JSON lacks '") + key + "'");
  return *it;
}

Eigen::VectorXd vector_from(const json& a, const char* what) {
  if (!a.is_array()) fail(ErrorCode::ModelFormat, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) fail(ErrorCode::ModelFormat, std::string(what) + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from(const json& a, Eigen::Index cols, const char* what) {
  if (!a.is_array()) fail(ErrorCode::ModelFormat, std::string(what) + " must be an array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), cols);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto row = vector_from(a[i], what);
    if (row.size() != cols) fail(ErrorCode::ModelFormat, std::string(what) + " row width mismatch");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

Normalization normalization_from(const json& j) {
  return {vector_from(need(j, "means"), "normalization.means"),
          vector_from(need(j, "scales"), "normalization.scales")};
}

double number_from(const json& j, const char* what) {
  if (!j.is_number()) fail(ErrorCode::ModelFormat, std::string(what) + " must be a number");
  return j.get<double>();
}

const std::set<std::string> kModelKeys = {
    "format_version", "regressor",    "kind",            "coefficients", "intercept", "gamma",
    "hyper",          "normalization", "training_inputs", "dual_weights", "jitter"};

}  // namespace

FeatureSetKind kind_of(const EnergyModel& model) noexcept {
  return std::visit([](const auto& m) -> FeatureSetKind {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>)
      return m.kind;
    else
      return m.kind();
  }, model);
}

Regressor regressor_of(const EnergyModel& model) noexcept {
  return std::holds_alternative<LinearModel>(model) ? Regressor::Linear : Regressor::Gpr;
}

double predict(const EnergyModel& model, std::span<const double> raw_row) {
  if (const auto* lr = std::get_if<LinearModel>(&model)) return predict_linear(*lr, raw_row);
  return std::get<GprModel>(model).predict(raw_row).mean;
}

EnergyModel train_model(const FeatureMatrix& features, const Eigen::VectorXd& targets,
                        Regressor regressor, const TrainOptions& opts) {
  if (regressor == Regressor::Linear) return fit_linear(features, targets, opts.linear);
  return fit_gpr(features, targets, opts.gpr);
}

std::string serialize_model(const EnergyModel& model, const json& metadata) {
  json j = json::object();
  if (metadata.is_object())
    for (const auto& [key, value] : metadata.items())
      if (!kModelKeys.contains(key)) j[key] = value;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = to_string(kind_of(model));
  j["regressor"] = to_string(regressor_of(model));
  if (const auto* lr = std::get_if<LinearModel>(&model)) {
    j["coefficients"] = to_json(lr->coefficients);
    j["intercept"] = lr->intercept ? json(*lr->intercept) : json(nullptr);
    j["normalization"] = lr->normalization ? to_json(*lr->normalization) : json(nullptr);
  } else {
    const auto& g = std::get<GprModel>(model);
    j["gamma"] = to_json(g.basis_coefficients());
    j["intercept"] = g.basis_coefficients()[0];
    j["hyper"] = {{"l", g.hyper().length_scale},
                  {"sigma_f2", g.hyper().signal_variance},
                  {"sigma_n2", g.hyper().noise_variance}};
    j["normalization"] = to_json(g.normalization());
    j["training_inputs"] = to_json(g.training_inputs());
    j["dual_weights"] = to_json(g.dual_weights());
    j["jitter"] = g.jitter();
  }
  return j.dump(2) + "\n";
}

StoredModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ModelFormat, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ModelFormat, "model JSON must be an object");
  const auto& version = need(j, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
    fail(ErrorCode::ModelFormat, "unsupported model format_version");

  FeatureSetKind kind{};
  Regressor regressor{};
  try {
    kind = parse_feature_set_kind(need(j, "kind").get<std::string>());
    regressor = parse_regressor(need(j, "regressor").get<std::string>());
  } catch (const json::exception&) {
    fail(ErrorCode::ModelFormat, "model kind/regressor must be strings");
  } catch (const Error& e) {
    fail(ErrorCode::ModelFormat, e.what());
  }
  const auto dim = static_cast<Eigen::Index>(feature_dimension(kind));

  StoredModel out{LinearModel{}, json::object()};
  for (const auto& [key, value] : j.items())
    if (!kModelKeys.contains(key)) out.metadata[key] = value;

  if (regressor == Regressor::Linear) {
    LinearModel lr;
    lr.kind = kind;
    lr.coefficients = vector_from(need(j, "coefficients"), "coefficients");
    if (lr.coefficients.size() != dim) fail(ErrorCode::ModelFormat, "coefficient count does not match kind");
    if (const auto it = j.find("intercept"); it != j.end() && !it->is_null())
      lr.intercept = number_from(*it, "intercept");
    if (const auto it = j.find("normalization"); it != j.end() && !it->is_null()) {
      lr.normalization = normalization_from(*it);
      if (lr.normalization->means.size() != dim || lr.normalization->scales.size() != dim)
        fail(ErrorCode::ModelFormat, "normalization width does not match kind");
    }
    out.model = std::move(lr);
    return out;
  }

  const auto& hyper = need(j, "hyper");
  GprHyperparams h{number_from(need(hyper, "l"), "hyper.l"), number_from(need(hyper, "sigma_f2"), "hyper.sigma_f2"),
                   number_from(need(hyper, "sigma_n2"), "hyper.sigma_n2")};
  const double jitter = j.contains("jitter") ? number_from(j["jitter"], "jitter") : 0.0;
  out.model = GprModel(kind, h, vector_from(need(j, "gamma"), "gamma"),
                       matrix_from(need(j, "training_inputs"), dim, "training_inputs"),
                       vector_from(need(j, "dual_weights"), "dual_weights"),
                       normalization_from(need(j, "normalization")), jitter);
  return out;
}

}  // namespace hwenergy::regression
