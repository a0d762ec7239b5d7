/* hwenergy: hardware video decoder energy models from software profiling. */
#ifndef HWENERGY_HWENERGY_H
#define HWENERGY_HWENERGY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(HWE_BUILDING_LIBRARY)
#define HWE_API __declspec(dllexport)
#else
#define HWE_API __declspec(dllimport)
#endif
#else
#define HWE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hwe_status {
  HWE_OK = 0,
  HWE_ERR_INVALID_ARGUMENT = 1,
  HWE_ERR_IO = 2,
  HWE_ERR_MISSING_EVENT = 3,
  HWE_ERR_MALFORMED_HEADER = 4,
  HWE_ERR_NON_NUMERIC_TOTAL = 5,
  HWE_ERR_MISSING_COUNTER = 6,
  HWE_ERR_NON_NUMERIC_VALUE = 7,
  HWE_ERR_NEGATIVE_ENERGY = 8,
  HWE_ERR_EMPTY_SERIES = 9,
  HWE_ERR_ZERO_MEAN = 10,
  HWE_ERR_TOO_FEW_SAMPLES = 11,
  HWE_ERR_DUPLICATE_ID = 12,
  HWE_ERR_SCHEMA_VIOLATION = 13,
  HWE_ERR_ROW_PARSE = 14,
  HWE_ERR_INVARIANT_VIOLATION = 15,
  HWE_ERR_RANK_DEFICIENT = 16,
  HWE_ERR_DIMENSION_MISMATCH = 17,
  HWE_ERR_NOT_POSITIVE_DEFINITE = 18,
  HWE_ERR_OPTIMIZATION_DIVERGED = 19,
  HWE_ERR_ZERO_MEASUREMENT = 20,
  HWE_ERR_LENGTH_MISMATCH = 21,
  HWE_ERR_CONSTANT_INPUT = 22,
  HWE_ERR_MISSING_FEATURE = 23,
  HWE_ERR_CODEC_LEAK = 24,
  HWE_ERR_CONSTANT_PREDICTIONS = 25,
  HWE_ERR_ID_MISMATCH = 26,
  HWE_ERR_NON_POSITIVE_ANCHOR_PREDICTION = 27,
  HWE_ERR_EMPTY_TRAINING_SET = 28,
  HWE_ERR_INVALID_SPEC = 29,
  HWE_ERR_MODEL_FORMAT = 30,
  HWE_ERR_INTERNAL = 99
} hwe_status;

typedef struct hwe_dataset hwe_dataset;
typedef struct hwe_model hwe_model;
/* A finished computation: a JSON document, a text table and named extra
   artifacts (for example the cross-codec scatter CSV). */
typedef struct hwe_report hwe_report;

/* ---- errors and memory ------------------------------------------------ */

HWE_API const char* hwe_version(void);
/* Stable identifier such as "CodecLeak"; "Unknown" for foreign values. */
HWE_API const char* hwe_status_name(hwe_status status);
/* Message of the last failed call on this thread; "" after a success. */
HWE_API const char* hwe_last_error(void);
/* Releases strings returned through char** out-parameters. */
HWE_API void hwe_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

HWE_API hwe_status hwe_dataset_new(const char* provenance, hwe_dataset** out);
/* format: "csv", "json" or NULL to detect. */
HWE_API hwe_status hwe_dataset_parse(const char* text, const char* format, hwe_dataset** out);
HWE_API hwe_status hwe_dataset_load(const char* path, hwe_dataset** out);
/* Writes JSON for a .json path, CSV otherwise. */
HWE_API hwe_status hwe_dataset_save(const hwe_dataset* dataset, const char* path);
HWE_API hwe_status hwe_dataset_serialize(const hwe_dataset* dataset, const char* format, char** out);
/* One record object in the dataset JSON layout; DuplicateId on collision. */
HWE_API hwe_status hwe_dataset_append_record_json(hwe_dataset* dataset, const char* record_json);
HWE_API hwe_status hwe_dataset_merge(const hwe_dataset* a, const hwe_dataset* b, hwe_dataset** out);
/* Keeps the records matching every non-NULL criterion. codecs is a
   comma-separated list. */
HWE_API hwe_status hwe_dataset_filter(const hwe_dataset* dataset, const char* codecs, const char* decoder_name,
                                      const char* decoder_kind, hwe_dataset** out);
HWE_API size_t hwe_dataset_size(const hwe_dataset* dataset);
HWE_API void hwe_dataset_free(hwe_dataset* dataset);

/* ---- ingestion --------------------------------------------------------- */

#define HWE_PE_COUNT 13

/* Totals in the order Ir Dr Dw I1mr D1mr D1mw ILmr DLmr DLmw Bc Bcm Bi Bim. */
HWE_API hwe_status hwe_parse_callgrind(const char* text, uint64_t counts[HWE_PE_COUNT]);
/* separator: 0 to detect, otherwise the field separator of perf stat -x. */
HWE_API hwe_status hwe_parse_perf_stat(const char* text, char separator, uint64_t* instructions, uint64_t* cycles,
                                       double* user_time);

typedef struct hwe_confidence_result {
  int passed;
  double relative_halfwidth;
  double mean;
  int n;
} hwe_confidence_result;

HWE_API hwe_status hwe_confidence_check(const double* values, size_t n, double max_deviation, double confidence,
                                        hwe_confidence_result* out);

typedef struct hwe_energy_sample {
  double joules;
  int n_repeats;
  int passed_confidence;
} hwe_energy_sample;

HWE_API hwe_status hwe_derive_energy(const double* active, size_t n_active, const double* idle, size_t n_idle,
                                     double max_deviation, double confidence, hwe_energy_sample* out);
/* Measurement log CSV: label,repeat_index,<joules|mwh>. */
HWE_API hwe_status hwe_derive_energy_from_log(const char* log_text, double max_deviation, double confidence,
                                              hwe_energy_sample* out);

/* ---- metrics ----------------------------------------------------------- */

HWE_API hwe_status hwe_mape(const double* measured, const double* estimated, size_t n, double* out);
HWE_API hwe_status hwe_pearson(const double* x, const double* y, size_t n, double* out);
HWE_API hwe_status hwe_fit_calibration(const double* predicted, const double* measured, size_t n, double* alpha,
                                       double* beta);

/* ---- models ------------------------------------------------------------ */

typedef struct hwe_fit_options {
  const char* regressor; /* "lr" or "gpr" */
  const char* kind;      /* "temporal", "perf_ctc" or "valgrind_13pe" */
  const char* target;    /* "energy_sw" or "energy_hw" */
  uint64_t seed;
  int intercept;         /* -1: feature-set default, 0: off, 1: on */
  int nonnegative;       /* LR: constrain coefficients to >= 0 */
  int gpr_restarts;
  int gpr_max_iterations;
} hwe_fit_options;

/* gpr, valgrind_13pe, energy_hw, seed 42, default intercept, 5 restarts,
   500 iterations. */
HWE_API void hwe_fit_options_init(hwe_fit_options* options);

HWE_API hwe_status hwe_model_train(const hwe_dataset* dataset, const hwe_fit_options* options, hwe_model** out);
HWE_API hwe_status hwe_model_parse(const char* json_text, hwe_model** out);
HWE_API hwe_status hwe_model_load(const char* path, hwe_model** out);
HWE_API hwe_status hwe_model_save(const hwe_model* model, const char* path);
HWE_API hwe_status hwe_model_serialize(const hwe_model* model, char** out);
/* Adds or replaces a top-level metadata key; value is JSON text. */
HWE_API hwe_status hwe_model_set_metadata(hwe_model* model, const char* key, const char* value_json);
/* Feature set name of the model ("valgrind_13pe", ...). */
HWE_API const char* hwe_model_kind(const hwe_model* model);
HWE_API const char* hwe_model_regressor(const hwe_model* model);
HWE_API hwe_status hwe_model_predict(const hwe_model* model, const double* row, size_t n, double* out);
/* Predicts every record; out must hold hwe_dataset_size(dataset) values. */
HWE_API hwe_status hwe_model_predict_dataset(const hwe_model* model, const hwe_dataset* dataset, double* out,
                                             size_t capacity);
HWE_API void hwe_model_free(hwe_model* model);

/* ---- workflows --------------------------------------------------------- */

typedef struct hwe_evaluate_options {
  hwe_fit_options fit;
  const char* kinds;    /* comma-separated feature sets, NULL for all three */
  int k;                /* folds, default 10 */
  int stratify;         /* stratify folds by sequence class */
  int skip_incomplete;  /* skip decoder/feature-set cells lacking data */
} hwe_evaluate_options;

HWE_API void hwe_evaluate_options_init(hwe_evaluate_options* options);
/* k-fold cross-validation per decoder and feature set. */
HWE_API hwe_status hwe_evaluate(const hwe_dataset* dataset, const hwe_evaluate_options* options, hwe_report** out);

typedef struct hwe_phase_options {
  hwe_fit_options fit;        /* target is always energy_hw */
  int phase_id;               /* 1..7, or 0 with the custom codec fields */
  const char* training_codecs;    /* custom phase: comma-separated */
  const char* verification_codec; /* custom phase */
  const char* decoder_scope;      /* "reference", "optimized" or "both" */
  const char* kinds;              /* comma-separated, NULL for fit.kind */
} hwe_phase_options;

HWE_API void hwe_phase_options_init(hwe_phase_options* options);
/* verify may be NULL: both sets are then split from train by codec.
   The report carries a "scatter_csv" artifact. */
HWE_API hwe_status hwe_cross_predict(const hwe_dataset* train, const hwe_dataset* verify,
                                     const hwe_phase_options* options, hwe_report** out);

typedef struct hwe_rehwed_options {
  hwe_fit_options fit;       /* training only; target is always energy_hw */
  const char* codecs;        /* training codecs, NULL for HEVC,VP9,AV1 */
  const char* join_key;      /* "id" or "bitstream" */
  const char* test_label;
  const char* anchor_label;
} hwe_rehwed_options;

HWE_API void hwe_rehwed_options_init(hwe_rehwed_options* options);
HWE_API hwe_status hwe_rehwed_train(const hwe_dataset* dataset, const hwe_rehwed_options* options, hwe_model** out);
HWE_API hwe_status hwe_rehwed_compute(const hwe_model* model, const hwe_dataset* test, const hwe_dataset* anchor,
                                      const hwe_rehwed_options* options, hwe_report** out);

/* spec_json NULL uses the default spec; seed overrides the spec's seed when
   non-NULL. The report JSON is the ground truth. */
HWE_API hwe_status hwe_synth(const char* spec_json, const uint64_t* seed, hwe_dataset** dataset, hwe_report** truth);
HWE_API hwe_status hwe_synth_default_spec(char** out);

/* ---- reports ----------------------------------------------------------- */

/* Pretty-printed JSON, terminated by a newline. */
HWE_API const char* hwe_report_json(const hwe_report* report);
HWE_API const char* hwe_report_text(const hwe_report* report);
/* NULL when the report has no artifact of that name. */
HWE_API const char* hwe_report_artifact(const hwe_report* report, const char* name);
HWE_API void hwe_report_free(hwe_report* report);

#ifdef __cplusplus
}
#endif

#endif
