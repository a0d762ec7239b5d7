#include "hwenergy/hwenergy.h"

#include <cstring>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchgen/benchgen.hpp"
#include "core/csv.hpp"
#include "core/error.hpp"
#include "core/types.hpp"
#include "crosscodec/crosscodec.hpp"
#include "evaluation/evaluation_report.hpp"
#include "evaluation/metrics.hpp"
#include "ingest/callgrind.hpp"
#include "ingest/dataset_io.hpp"
#include "ingest/measurement.hpp"
#include "ingest/perf_stat.hpp"
#include "regression/feature_matrix.hpp"
#include "regression/model_io.hpp"
#include "rehwed/rehwed.hpp"

using namespace hwenergy;
using nlohmann::json;

struct hwe_dataset {
  Dataset data;
};

struct hwe_model {
  regression::StoredModel stored;
};

struct hwe_report {
  std::string json_text;
  std::string text;
  std::map<std::string, std::string> artifacts;
};

namespace {

thread_local std::string g_last_error;

hwe_status record(hwe_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body and converts exceptions into a status plus thread-local message.
template <typename F>
hwe_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HWE_OK;
  } catch (const Error& e) {
    return record(static_cast<hwe_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(HWE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(HWE_ERR_INTERNAL, e.what());
  }
}

void require(bool condition, const char* what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::string_view s(text);
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    const auto item = text::trim(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (!item.empty()) out.emplace_back(item);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<Codec> parse_codecs(const char* text) {
  std::vector<Codec> out;
  for (const auto& s : split_list(text)) out.push_back(parse_codec(s));
  return out;
}

std::vector<FeatureSetKind> parse_kinds(const char* text, std::vector<FeatureSetKind> fallback) {
  std::vector<FeatureSetKind> out;
  for (const auto& s : split_list(text)) {
    if (s == "all") return {kAllFeatureSets.begin(), kAllFeatureSets.end()};
    out.push_back(parse_feature_set_kind(s));
  }
  return out.empty() ? fallback : out;
}

regression::TrainOptions train_options(const hwe_fit_options& o) {
  regression::TrainOptions t;
  if (o.intercept >= 0) t.linear.intercept = o.intercept != 0;
  t.linear.nonnegative = o.nonnegative != 0;
  require(o.gpr_restarts >= 0, "gpr_restarts must be >= 0");
  require(o.gpr_max_iterations >= 1, "gpr_max_iterations must be >= 1");
  t.gpr.restarts = o.gpr_restarts;
  t.gpr.max_iterations = o.gpr_max_iterations;
  t.gpr.seed = o.seed;
  return t;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

hwe_report* make_report(std::string json_text, std::string text) {
  auto* r = new hwe_report;
  r->json_text = std::move(json_text);
  r->text = std::move(text);
  return r;
}

ingest::DatasetFormat parse_format(const char* format) {
  if (!format) return ingest::DatasetFormat::Auto;
  const std::string f(format);
  if (f == "csv") return ingest::DatasetFormat::Csv;
  if (f == "json") return ingest::DatasetFormat::Json;
  if (f == "auto") return ingest::DatasetFormat::Auto;
  fail(ErrorCode::InvalidArgument, "unknown dataset format '" + f + "'");
}

}  // namespace

extern "C" {

const char* hwe_version(void) { return "1.0.0"; }

const char* hwe_status_name(hwe_status status) {
  if (status == HWE_OK) return "Ok";
  if (status == HWE_ERR_INTERNAL) return "Internal";
  if (status >= HWE_ERR_INVALID_ARGUMENT && status <= HWE_ERR_MODEL_FORMAT)
    return to_string(static_cast<ErrorCode>(status)).data();
  return "Unknown";
}

const char* hwe_last_error(void) { return g_last_error.c_str(); }

void hwe_string_free(char* s) { std::free(s); }

hwe_status hwe_dataset_new(const char* provenance, hwe_dataset** out) {
  return guarded([&] {
    require(out, "out is NULL");
    *out = new hwe_dataset{Dataset({}, provenance ? provenance : "")};
  });
}

hwe_status hwe_dataset_parse(const char* text, const char* format, hwe_dataset** out) {
  return guarded([&] {
    require(text && out, "text and out must not be NULL");
    *out = new hwe_dataset{ingest::load_dataset(text, parse_format(format))};
  });
}

hwe_status hwe_dataset_load(const char* path, hwe_dataset** out) {
  return guarded([&] {
    require(path && out, "path and out must not be NULL");
    *out = new hwe_dataset{ingest::load_dataset_file(path)};
  });
}

hwe_status hwe_dataset_save(const hwe_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset && path, "dataset and path must not be NULL");
    ingest::save_dataset_file(dataset->data, path);
  });
}

hwe_status hwe_dataset_serialize(const hwe_dataset* dataset, const char* format, char** out) {
  return guarded([&] {
    require(dataset && out, "dataset and out must not be NULL");
    const bool as_json = parse_format(format) == ingest::DatasetFormat::Json;
    *out = duplicate(as_json ? ingest::write_dataset_json(dataset->data) : ingest::write_dataset_csv(dataset->data));
  });
}

hwe_status hwe_dataset_append_record_json(hwe_dataset* dataset, const char* record_json) {
  return guarded([&] {
    require(dataset && record_json, "dataset and record_json must not be NULL");
    json rec;
    try {
      rec = json::parse(record_json);
    } catch (const json::exception& e) {
      fail(ErrorCode::RowParseError, std::string("record JSON: ") + e.what());
    }
    const json doc = {{"provenance", dataset->data.provenance()}, {"records", json::array({rec})}};
    const auto one = ingest::load_dataset(doc.dump(), ingest::DatasetFormat::Json);
    dataset->data = dataset->data.merged(one);
  });
}

hwe_status hwe_dataset_merge(const hwe_dataset* a, const hwe_dataset* b, hwe_dataset** out) {
  return guarded([&] {
    require(a && b && out, "arguments must not be NULL");
    *out = new hwe_dataset{a->data.merged(b->data)};
  });
}

hwe_status hwe_dataset_filter(const hwe_dataset* dataset, const char* codecs, const char* decoder_name,
                              const char* decoder_kind, hwe_dataset** out) {
  return guarded([&] {
    require(dataset && out, "dataset and out must not be NULL");
    const auto codec_list = parse_codecs(codecs);
    std::optional<DecoderKind> kind;
    if (decoder_kind) kind = parse_decoder_kind(decoder_kind);
    *out = new hwe_dataset{dataset->data.filtered(
        [&](const BitstreamRecord& r) {
          if (codecs && std::find(codec_list.begin(), codec_list.end(), r.codec) == codec_list.end()) return false;
          if (decoder_name && r.decoder_name != decoder_name) return false;
          if (kind && r.decoder_kind != *kind) return false;
          return true;
        },
        dataset->data.provenance())};
  });
}

size_t hwe_dataset_size(const hwe_dataset* dataset) { return dataset ? dataset->data.size() : 0; }

void hwe_dataset_free(hwe_dataset* dataset) { delete dataset; }

hwe_status hwe_parse_callgrind(const char* text, uint64_t counts[HWE_PE_COUNT]) {
  return guarded([&] {
    require(text && counts, "text and counts must not be NULL");
    const auto pe = ingest::parse_callgrind(text);
    for (std::size_t i = 0; i < kPeEventCount; ++i) counts[i] = pe.counts()[i];
  });
}

hwe_status hwe_parse_perf_stat(const char* text, char separator, uint64_t* instructions, uint64_t* cycles,
                               double* user_time) {
  return guarded([&] {
    require(text && instructions && cycles && user_time, "arguments must not be NULL");
    const auto perf =
        ingest::parse_perf_stat(text, separator ? std::optional<char>(separator) : std::nullopt);
    *instructions = perf.instructions;
    *cycles = perf.cycles;
    *user_time = perf.user_time;
  });
}

hwe_status hwe_confidence_check(const double* values, size_t n, double max_deviation, double confidence,
                                hwe_confidence_result* out) {
  return guarded([&] {
    require(out && (values || n == 0), "arguments must not be NULL");
    const auto r = ingest::confidence_check({std::vector<double>(values, values + n), SeriesLabel::Active},
                                            max_deviation, confidence);
    *out = {r.passed ? 1 : 0, r.relative_halfwidth, r.mean, r.n};
  });
}

hwe_status hwe_derive_energy(const double* active, size_t n_active, const double* idle, size_t n_idle,
                             double max_deviation, double confidence, hwe_energy_sample* out) {
  return guarded([&] {
    require(out && (active || n_active == 0) && (idle || n_idle == 0), "arguments must not be NULL");
    const MeasurementSeries a{std::vector<double>(active, active + n_active), SeriesLabel::Active};
    const MeasurementSeries i{std::vector<double>(idle, idle + n_idle), SeriesLabel::Idle};
    const auto s = ingest::derive_decoding_energy(a, i, MeasurementSetup::MSH, max_deviation, confidence);
    *out = {s.joules, s.n_repeats, s.passed_confidence ? 1 : 0};
  });
}

hwe_status hwe_derive_energy_from_log(const char* log_text, double max_deviation, double confidence,
                                      hwe_energy_sample* out) {
  return guarded([&] {
    require(log_text && out, "arguments must not be NULL");
    const auto log = ingest::parse_measurement_log(log_text);
    const auto s =
        ingest::derive_decoding_energy(log.active, log.idle, MeasurementSetup::MSH, max_deviation, confidence);
    *out = {s.joules, s.n_repeats, s.passed_confidence ? 1 : 0};
  });
}

hwe_status hwe_mape(const double* measured, const double* estimated, size_t n, double* out) {
  return guarded([&] {
    require(out && ((measured && estimated) || n == 0), "arguments must not be NULL");
    *out = evaluation::mape({measured, n}, {estimated, n});
  });
}

hwe_status hwe_pearson(const double* x, const double* y, size_t n, double* out) {
  return guarded([&] {
    require(out && ((x && y) || n == 0), "arguments must not be NULL");
    *out = evaluation::pearson({x, n}, {y, n});
  });
}

hwe_status hwe_fit_calibration(const double* predicted, const double* measured, size_t n, double* alpha,
                               double* beta) {
  return guarded([&] {
    require(alpha && beta && ((predicted && measured) || n == 0), "arguments must not be NULL");
    const auto p = crosscodec::fit_calibration({predicted, n}, {measured, n});
    *alpha = p.alpha;
    *beta = p.beta;
  });
}

void hwe_fit_options_init(hwe_fit_options* o) {
  if (!o) return;
  o->regressor = "gpr";
  o->kind = "valgrind_13pe";
  o->target = "energy_hw";
  o->seed = 42;
  o->intercept = -1;
  o->nonnegative = 0;
  o->gpr_restarts = 5;
  o->gpr_max_iterations = 500;
}

hwe_status hwe_model_train(const hwe_dataset* dataset, const hwe_fit_options* options, hwe_model** out) {
  return guarded([&] {
    require(dataset && options && out, "arguments must not be NULL");
    const auto kind = parse_feature_set_kind(options->kind);
    const auto target = parse_energy_target(options->target);
    const auto regressor = parse_regressor(options->regressor);
    const auto data = regression::training_data(dataset->data, kind, target);
    auto model = regression::train_model(data.features, data.targets, regressor, train_options(*options));
    json meta = {{"target", to_string(target)}, {"seed", options->seed}, {"n_train", dataset->data.size()}};
    if (!dataset->data.provenance().empty()) meta["provenance"] = dataset->data.provenance();
    *out = new hwe_model{{std::move(model), std::move(meta)}};
  });
}

hwe_status hwe_model_parse(const char* json_text, hwe_model** out) {
  return guarded([&] {
    require(json_text && out, "arguments must not be NULL");
    *out = new hwe_model{regression::parse_model(json_text)};
  });
}

hwe_status hwe_model_load(const char* path, hwe_model** out) {
  return guarded([&] {
    require(path && out, "arguments must not be NULL");
    try {
      *out = new hwe_model{regression::parse_model(text::read_file(path))};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      fail(e.code(), std::string(path) + ": " + e.what());
    }
  });
}

hwe_status hwe_model_save(const hwe_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "arguments must not be NULL");
    text::write_file(path, regression::serialize_model(model->stored.model, model->stored.metadata));
  });
}

hwe_status hwe_model_serialize(const hwe_model* model, char** out) {
  return guarded([&] {
    require(model && out, "arguments must not be NULL");
    *out = duplicate(regression::serialize_model(model->stored.model, model->stored.metadata));
  });
}

hwe_status hwe_model_set_metadata(hwe_model* model, const char* key, const char* value_json) {
  return guarded([&] {
    require(model && key && value_json, "arguments must not be NULL");
    try {
      model->stored.metadata[key] = json::parse(value_json);
    } catch (const json::exception& e) {
      fail(ErrorCode::InvalidArgument, std::string("metadata value: ") + e.what());
    }
  });
}

const char* hwe_model_kind(const hwe_model* model) {
  return model ? to_string(regression::kind_of(model->stored.model)).data() : "";
}

const char* hwe_model_regressor(const hwe_model* model) {
  return model ? to_string(regression::regressor_of(model->stored.model)).data() : "";
}

hwe_status hwe_model_predict(const hwe_model* model, const double* row, size_t n, double* out) {
  return guarded([&] {
    require(model && out && (row || n == 0), "arguments must not be NULL");
    *out = regression::predict(model->stored.model, {row, n});
  });
}

hwe_status hwe_model_predict_dataset(const hwe_model* model, const hwe_dataset* dataset, double* out,
                                     size_t capacity) {
  return guarded([&] {
    require(model && dataset && out, "arguments must not be NULL");
    require(capacity >= dataset->data.size(), "output buffer is too small");
    const auto kind = regression::kind_of(model->stored.model);
    dataset->data.require(kind, std::nullopt);
    for (std::size_t i = 0; i < dataset->data.size(); ++i)
      out[i] = regression::predict(model->stored.model, dataset->data[i].feature_row(kind));
  });
}

void hwe_model_free(hwe_model* model) { delete model; }

void hwe_evaluate_options_init(hwe_evaluate_options* o) {
  if (!o) return;
  hwe_fit_options_init(&o->fit);
  o->kinds = nullptr;
  o->k = 10;
  o->stratify = 0;
  o->skip_incomplete = 0;
}

hwe_status hwe_evaluate(const hwe_dataset* dataset, const hwe_evaluate_options* options, hwe_report** out) {
  return guarded([&] {
    require(dataset && options && out, "arguments must not be NULL");
    evaluation::CrossValidationOptions cv;
    cv.k = options->k;
    cv.seed = options->fit.seed;
    cv.stratify = options->stratify != 0;
    cv.train = train_options(options->fit);
    const auto kinds = parse_kinds(options->kinds, {kAllFeatureSets.begin(), kAllFeatureSets.end()});
    const auto grid = evaluation::evaluate_grid(dataset->data, kinds, parse_regressor(options->fit.regressor),
                                                parse_energy_target(options->fit.target), cv,
                                                options->skip_incomplete != 0);
    *out = make_report(dump(evaluation::to_json(grid)), evaluation::format_table(grid));
  });
}

void hwe_phase_options_init(hwe_phase_options* o) {
  if (!o) return;
  hwe_fit_options_init(&o->fit);
  o->phase_id = 7;
  o->training_codecs = nullptr;
  o->verification_codec = nullptr;
  o->decoder_scope = "both";
  o->kinds = nullptr;
}

hwe_status hwe_cross_predict(const hwe_dataset* train, const hwe_dataset* verify, const hwe_phase_options* options,
                             hwe_report** out) {
  return guarded([&] {
    require(train && options && out, "arguments must not be NULL");
    const auto scope = crosscodec::parse_decoder_scope(options->decoder_scope ? options->decoder_scope : "both");
    crosscodec::PhaseConfig phase;
    if (options->phase_id == 0) {
      require(options->training_codecs && options->verification_codec,
              "a custom phase needs training_codecs and verification_codec");
      phase = {0, parse_codecs(options->training_codecs), parse_codec(options->verification_codec), scope};
    } else {
      phase = crosscodec::phase_preset(options->phase_id, scope);
    }
    phase.validate();
    Dataset train_set = train->data;
    Dataset verify_set;
    if (verify) {
      verify_set = verify->data;
    } else {
      std::tie(train_set, verify_set) = crosscodec::split_for_phase(train->data, phase);
    }
    const auto kinds = parse_kinds(options->kinds, {parse_feature_set_kind(options->fit.kind)});
    const auto regressor = parse_regressor(options->fit.regressor);
    const auto opts = train_options(options->fit);
    std::vector<crosscodec::CrossCodecReport> reports;
    for (auto kind : kinds) {
      try {
        reports.push_back(crosscodec::run_phase(train_set, verify_set, phase, kind, regressor, options->fit.seed, opts));
      } catch (const Error& e) {
        fail(e.code(), std::string(to_string(kind)) + ": " + e.what());
      }
    }
    auto* report = make_report(dump(crosscodec::to_json(reports)), crosscodec::format_table(reports));
    report->artifacts["scatter_csv"] = crosscodec::scatter_csv(reports);
    *out = report;
  });
}

void hwe_rehwed_options_init(hwe_rehwed_options* o) {
  if (!o) return;
  hwe_fit_options_init(&o->fit);
  o->codecs = nullptr;
  o->join_key = "id";
  o->test_label = "test";
  o->anchor_label = "anchor";
}

hwe_status hwe_rehwed_train(const hwe_dataset* dataset, const hwe_rehwed_options* options, hwe_model** out) {
  return guarded([&] {
    require(dataset && options && out, "arguments must not be NULL");
    rehwed::RehwedTrainingOptions opts;
    if (options->codecs) opts.codecs = parse_codecs(options->codecs);
    require(!opts.codecs.empty(), "no training codecs");
    opts.kind = parse_feature_set_kind(options->fit.kind);
    opts.regressor = parse_regressor(options->fit.regressor);
    opts.seed = options->fit.seed;
    opts.train = train_options(options->fit);
    *out = new hwe_model{rehwed::train_rehwed_model(dataset->data, opts)};
  });
}

hwe_status hwe_rehwed_compute(const hwe_model* model, const hwe_dataset* test, const hwe_dataset* anchor,
                              const hwe_rehwed_options* options, hwe_report** out) {
  return guarded([&] {
    require(model && test && anchor && options && out, "arguments must not be NULL");
    const auto kind = regression::kind_of(model->stored.model);
    const auto join = rehwed::parse_join_key(options->join_key ? options->join_key : "id");
    const auto t = rehwed::profile_rows(test->data, kind, join);
    const auto a = rehwed::profile_rows(anchor->data, kind, join);
    const auto report = rehwed::compute_rehwed(model->stored.model, t, a, options->test_label ? options->test_label : "test",
                                               options->anchor_label ? options->anchor_label : "anchor");
    *out = make_report(dump(rehwed::to_json(report)), rehwed::format_table({report}));
  });
}

hwe_status hwe_synth(const char* spec_json, const uint64_t* seed, hwe_dataset** dataset, hwe_report** truth) {
  return guarded([&] {
    require(dataset, "dataset must not be NULL");
    auto spec = spec_json ? benchgen::parse_spec_text(spec_json) : benchgen::default_spec();
    if (seed) spec.seed = *seed;
    auto corpus = benchgen::generate(spec);
    const std::string summary = std::to_string(corpus.dataset.size()) + " records, " +
                                std::to_string(spec.decoders.size()) + " decoders, seed " +
                                std::to_string(spec.seed) + "\n";
    hwe_report* report = truth ? make_report(dump(benchgen::to_json(corpus.truth)), summary) : nullptr;
    *dataset = new hwe_dataset{std::move(corpus.dataset)};
    if (truth) *truth = report;
  });
}

hwe_status hwe_synth_default_spec(char** out) {
  return guarded([&] {
    require(out, "out must not be NULL");
    *out = duplicate(dump(benchgen::spec_to_json(benchgen::default_spec())));
  });
}

const char* hwe_report_json(const hwe_report* report) { return report ? report->json_text.c_str() : ""; }

const char* hwe_report_text(const hwe_report* report) { return report ? report->text.c_str() : ""; }

const char* hwe_report_artifact(const hwe_report* report, const char* name) {
  if (!report || !name) return nullptr;
  const auto it = report->artifacts.find(name);
  return it == report->artifacts.end() ? nullptr : it->second.c_str();
}

void hwe_report_free(hwe_report* report) { delete report; }

}  // extern "C"
