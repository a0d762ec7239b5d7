#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "hwenergy/hwenergy.h"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fixture(const std::string& name) { return read_file(std::string(HWE_FIXTURES) + "/" + name); }

struct DatasetPtr {
  hwe_dataset* p = nullptr;
  ~DatasetPtr() { hwe_dataset_free(p); }
};
struct ModelPtr {
  hwe_model* p = nullptr;
  ~ModelPtr() { hwe_model_free(p); }
};
struct ReportPtr {
  hwe_report* p = nullptr;
  ~ReportPtr() { hwe_report_free(p); }
};

// Small synthetic corpus: n bitstreams per default decoder.
void synth(DatasetPtr& out, int n, double noise, uint64_t seed) {
  const std::string spec = R"({"n_bitstreams": )" + std::to_string(n) + R"(, "noise_sigma_relative": )" +
                           std::to_string(noise) + "}";
  ReportPtr truth;
  REQUIRE(hwe_synth(spec.c_str(), &seed, &out.p, &truth.p) == HWE_OK);
}

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::string(hwe_status_name(HWE_OK)) == "Ok");
  CHECK(std::string(hwe_status_name(HWE_ERR_CODEC_LEAK)) == "CodecLeak");
  CHECK(std::string(hwe_status_name(static_cast<hwe_status>(1234))) == "Unknown");
  CHECK(std::strlen(hwe_version()) > 0);
  double out = 0;
  const double m[] = {10, 0}, e[] = {1, 1};
  CHECK(hwe_mape(m, e, 2, &out) == HWE_ERR_ZERO_MEASUREMENT);
  CHECK(std::strlen(hwe_last_error()) > 0);
  const double m2[] = {10, 20}, e2[] = {11, 18};
  CHECK(hwe_mape(m2, e2, 2, &out) == HWE_OK);
  CHECK(out == doctest::Approx(0.10));
  CHECK(std::string(hwe_last_error()).empty());
  CHECK(hwe_mape(nullptr, e2, 2, &out) == HWE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("parsers through the C API") {
  uint64_t counts[HWE_PE_COUNT];
  REQUIRE(hwe_parse_callgrind(fixture("callgrind.out").c_str(), counts) == HWE_OK);
  const uint64_t expected[HWE_PE_COUNT] = {1000, 300, 200, 10, 5, 4, 2, 1, 1, 150, 20, 30, 6};
  for (int i = 0; i < HWE_PE_COUNT; ++i) CHECK(counts[i] == expected[i]);
  CHECK(hwe_parse_callgrind(fixture("callgrind_missing_bim.out").c_str(), counts) == HWE_ERR_MISSING_EVENT);

  uint64_t instr = 0, cycles = 0;
  double user = 0;
  REQUIRE(hwe_parse_perf_stat(fixture("perf_stat.csv").c_str(), 0, &instr, &cycles, &user) == HWE_OK);
  CHECK(instr == 123456);
  CHECK(cycles == 98765);
  CHECK(user == doctest::Approx(1.5));
  CHECK(hwe_parse_perf_stat(fixture("perf_missing_cycles.csv").c_str(), 0, &instr, &cycles, &user) ==
        HWE_ERR_MISSING_COUNTER);
  CHECK(std::string(hwe_last_error()).find("cycles") != std::string::npos);

  hwe_energy_sample sample{};
  REQUIRE(hwe_derive_energy_from_log(fixture("energy_hw.csv").c_str(), 0.05, 0.99, &sample) == HWE_OK);
  CHECK(sample.joules == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(sample.passed_confidence == 1);

  const double same[] = {3, 3, 3, 3};
  hwe_confidence_result c{};
  REQUIRE(hwe_confidence_check(same, 4, 0.01, 0.99, &c) == HWE_OK);
  CHECK(c.passed == 1);
  CHECK(c.relative_halfwidth == 0.0);
}

TEST_CASE("metrics and calibration") {
  const double x[] = {1, 2, 3, 4}, y[] = {7, 9, 11, 13};
  double r = 0, a = 0, b = 0;
  REQUIRE(hwe_pearson(x, y, 4, &r) == HWE_OK);
  CHECK(r == doctest::Approx(1.0));
  REQUIRE(hwe_fit_calibration(x, y, 4, &a, &b) == HWE_OK);
  CHECK(a == doctest::Approx(5.0));
  CHECK(b == doctest::Approx(2.0));
  const double c[] = {1, 1, 1, 1};
  CHECK(hwe_fit_calibration(c, y, 4, &a, &b) == HWE_ERR_CONSTANT_PREDICTIONS);
}

TEST_CASE("dataset round trip, filter and duplicate ids") {
  DatasetPtr ds;
  synth(ds, 8, 0.0, 42);
  CHECK(hwe_dataset_size(ds.p) == 64);
  char* csv = nullptr;
  REQUIRE(hwe_dataset_serialize(ds.p, "csv", &csv) == HWE_OK);
  DatasetPtr back;
  REQUIRE(hwe_dataset_parse(csv, nullptr, &back.p) == HWE_OK);
  char* csv2 = nullptr;
  REQUIRE(hwe_dataset_serialize(back.p, "csv", &csv2) == HWE_OK);
  CHECK(std::string(csv) == std::string(csv2));
  hwe_string_free(csv);
  hwe_string_free(csv2);

  DatasetPtr av1;
  REQUIRE(hwe_dataset_filter(ds.p, "AV1", nullptr, "optimized", &av1.p) == HWE_OK);
  CHECK(hwe_dataset_size(av1.p) == 8);
  DatasetPtr merged;
  CHECK(hwe_dataset_merge(ds.p, av1.p, &merged.p) == HWE_ERR_DUPLICATE_ID);

  char* js = nullptr;
  REQUIRE(hwe_dataset_serialize(av1.p, "json", &js) == HWE_OK);
  const auto doc = nlohmann::json::parse(js);
  hwe_string_free(js);
  const auto& records = doc.is_array() ? doc : doc.at("records");
  const std::string rec = records.at(0).dump();
  DatasetPtr fresh;
  REQUIRE(hwe_dataset_new("test", &fresh.p) == HWE_OK);
  REQUIRE(hwe_dataset_append_record_json(fresh.p, rec.c_str()) == HWE_OK);
  CHECK(hwe_dataset_size(fresh.p) == 1);
  CHECK(hwe_dataset_append_record_json(fresh.p, rec.c_str()) == HWE_ERR_DUPLICATE_ID);
  CHECK(hwe_dataset_append_record_json(fresh.p, "{") == HWE_ERR_ROW_PARSE);
}

TEST_CASE("model train, predict and round trip") {
  DatasetPtr ds;
  synth(ds, 24, 0.0, 7);
  DatasetPtr hevc;
  REQUIRE(hwe_dataset_filter(ds.p, "HEVC", nullptr, nullptr, &hevc.p) == HWE_OK);
  hwe_fit_options opts;
  hwe_fit_options_init(&opts);
  opts.regressor = "lr";
  opts.target = "energy_sw";
  ModelPtr m;
  REQUIRE(hwe_model_train(hevc.p, &opts, &m.p) == HWE_OK);
  CHECK(std::string(hwe_model_kind(m.p)) == "valgrind_13pe");
  CHECK(std::string(hwe_model_regressor(m.p)) == "lr");
  REQUIRE(hwe_model_set_metadata(m.p, "note", "\"hello\"") == HWE_OK);
  char* text = nullptr;
  REQUIRE(hwe_model_serialize(m.p, &text) == HWE_OK);
  ModelPtr back;
  REQUIRE(hwe_model_parse(text, &back.p) == HWE_OK);
  CHECK(nlohmann::json::parse(text)["note"] == "hello");
  hwe_string_free(text);

  std::vector<double> a(hwe_dataset_size(hevc.p)), b(a.size());
  REQUIRE(hwe_model_predict_dataset(m.p, hevc.p, a.data(), a.size()) == HWE_OK);
  REQUIRE(hwe_model_predict_dataset(back.p, hevc.p, b.data(), b.size()) == HWE_OK);
  CHECK(a == b);
  CHECK(hwe_model_predict_dataset(m.p, hevc.p, a.data(), 1) == HWE_ERR_INVALID_ARGUMENT);
  const double row[3] = {1, 2, 3};
  double out = 0;
  CHECK(hwe_model_predict(m.p, row, 3, &out) == HWE_ERR_DIMENSION_MISMATCH);
  CHECK(hwe_model_parse("{}", &back.p) == HWE_ERR_MODEL_FORMAT);
  opts.regressor = "svm";
  ModelPtr bad;
  CHECK(hwe_model_train(hevc.p, &opts, &bad.p) == HWE_ERR_SCHEMA_VIOLATION);
}

TEST_CASE("evaluate and cross-predict reports") {
  DatasetPtr ds;
  synth(ds, 24, 0.0, 3);
  hwe_evaluate_options eo;
  hwe_evaluate_options_init(&eo);
  eo.fit.regressor = "lr";
  eo.fit.target = "energy_sw";
  eo.k = 4;
  ReportPtr r1, r2;
  REQUIRE(hwe_evaluate(ds.p, &eo, &r1.p) == HWE_OK);
  REQUIRE(hwe_evaluate(ds.p, &eo, &r2.p) == HWE_OK);
  CHECK(std::string(hwe_report_json(r1.p)) == std::string(hwe_report_json(r2.p)));
  CHECK(std::string(hwe_report_text(r1.p)).find("Average") != std::string::npos);

  hwe_phase_options po;
  hwe_phase_options_init(&po);
  po.fit.regressor = "lr";
  ReportPtr cp;
  REQUIRE(hwe_cross_predict(ds.p, nullptr, &po, &cp.p) == HWE_OK);
  const auto doc = nlohmann::json::parse(hwe_report_json(cp.p));
  CHECK(doc.dump().find("HEVC") != std::string::npos);
  const char* scatter = hwe_report_artifact(cp.p, "scatter_csv");
  REQUIRE(scatter != nullptr);
  CHECK(std::string(scatter).rfind("phase,kind,regressor,group,id,e_veri,e_cross,e_veri_hat", 0) == 0);
  CHECK(hwe_report_artifact(cp.p, "nope") == nullptr);

  ReportPtr leak;
  CHECK(hwe_cross_predict(ds.p, ds.p, &po, &leak.p) == HWE_ERR_CODEC_LEAK);
  po.phase_id = 8;
  CHECK(hwe_cross_predict(ds.p, nullptr, &po, &leak.p) == HWE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("rehwed through the C API") {
  DatasetPtr ds;
  synth(ds, 16, 0.02, 5);
  hwe_rehwed_options ro;
  hwe_rehwed_options_init(&ro);
  ro.fit.regressor = "lr";
  ModelPtr m;
  REQUIRE(hwe_rehwed_train(ds.p, &ro, &m.p) == HWE_OK);
  DatasetPtr dav1d;
  REQUIRE(hwe_dataset_filter(ds.p, nullptr, "dav1d", nullptr, &dav1d.p) == HWE_OK);
  ReportPtr r;
  REQUIRE(hwe_rehwed_compute(m.p, dav1d.p, dav1d.p, &ro, &r.p) == HWE_OK);
  const auto doc = nlohmann::json::parse(hwe_report_json(r.p));
  CHECK(doc["reports"].is_array() ? doc["reports"][0]["rehwed"] == 1.0 : doc["rehwed"] == 1.0);
  CHECK(std::string(hwe_report_text(r.p)).find("100.00%") != std::string::npos);

  DatasetPtr libaom;
  REQUIRE(hwe_dataset_filter(ds.p, nullptr, "libaom", nullptr, &libaom.p) == HWE_OK);
  ReportPtr mismatch;
  CHECK(hwe_rehwed_compute(m.p, libaom.p, dav1d.p, &ro, &mismatch.p) == HWE_ERR_ID_MISMATCH);
  ro.join_key = "bitstream";
  REQUIRE(hwe_rehwed_compute(m.p, libaom.p, dav1d.p, &ro, &mismatch.p) == HWE_OK);
}

TEST_CASE("synth spec handling") {
  char* spec = nullptr;
  REQUIRE(hwe_synth_default_spec(&spec) == HWE_OK);
  CHECK(nlohmann::json::parse(spec).contains("decoders"));
  hwe_string_free(spec);
  DatasetPtr ds;
  ReportPtr truth;
  CHECK(hwe_synth(R"({"noise_sigma_relative": -1})", nullptr, &ds.p, &truth.p) == HWE_ERR_INVALID_SPEC);
  REQUIRE(hwe_synth(nullptr, nullptr, &ds.p, &truth.p) == HWE_OK);
  CHECK(hwe_dataset_size(ds.p) == 800);
  CHECK(nlohmann::json::parse(hwe_report_json(truth.p)).contains("expected_mape_floor"));
}
