#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hwenergy/hwenergy.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitUsage = 64;

// A library failure; carries the status for the diagnostic line.
struct Failure {
  hwe_status status;
  std::string message;
};

void check(hwe_status status, const std::string& context = {}) {
  if (status == HWE_OK) return;
  std::string msg = hwe_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure{status, msg};
}

struct UsageError {
  std::string message;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{HWE_ERR_IO, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << contents)) throw Failure{HWE_ERR_IO, "cannot write " + path.string()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : ptr(std::exchange(other.ptr, nullptr)) {}
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using DatasetHandle = Handle<hwe_dataset, hwe_dataset_free>;
using ModelHandle = Handle<hwe_model, hwe_model_free>;
using ReportHandle = Handle<hwe_report, hwe_report_free>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { hwe_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

// Options whose resolved values are written to resolved_config.json.
class Recorder {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    entries_[app].push_back({name, [&var] { return json(var); }});
    return app->add_option("--" + name, var, help)->capture_default_str();
  }
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, std::optional<T>& var, const std::string& help) {
    entries_[app].push_back({name, [&var] { return var ? json(*var) : json(nullptr); }});
    return app->add_option("--" + name, var, help);
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
    entries_[app].push_back({name, [&var] { return json(var); }});
    return app->add_flag("--" + name, var, help);
  }

  json resolve(CLI::App* global, CLI::App* sub) const {
    json out = json::object();
    out["subcommand"] = sub->get_name();
    for (auto* app : {global, sub}) {
      const auto it = entries_.find(app);
      if (it == entries_.end()) continue;
      for (const auto& [name, get] : it->second) {
        auto v = get();
        if (!v.is_null()) out[name] = std::move(v);
      }
    }
    return out;
  }

 private:
  struct Entry {
    std::string name;
    std::function<json()> get;
  };
  std::map<const CLI::App*, std::vector<Entry>> entries_;
};

struct Globals {
  std::uint64_t seed = 42;
  std::string config;
  std::string out_dir = "hwenergy-out";
  std::string format = "both";
};

struct FitFlags {
  std::string regressor = "gpr";
  std::string target = "energy_hw";
  std::string intercept = "auto";
  bool nonnegative = false;
  int restarts = 5;
  int max_iterations = 500;

  void add(Recorder& rec, CLI::App* app, bool with_target) {
    rec.add(app, "regressor", regressor, "Regressor: lr or gpr")->check(CLI::IsMember({"lr", "gpr", "linear"}));
    if (with_target)
      rec.add(app, "target", target, "Energy target: energy_hw or energy_sw")
          ->check(CLI::IsMember({"energy_hw", "energy_sw", "hw", "sw"}));
    rec.add(app, "intercept", intercept, "LR intercept: auto, on or off")->check(CLI::IsMember({"auto", "on", "off"}));
    rec.flag(app, "nonnegative", nonnegative, "Constrain LR coefficients to be nonnegative");
    rec.add(app, "restarts", restarts, "GPR optimizer restarts")->check(CLI::NonNegativeNumber);
    rec.add(app, "max-iterations", max_iterations, "GPR optimizer iterations per start")->check(CLI::PositiveNumber);
  }

  hwe_fit_options options(std::uint64_t seed) const {
    hwe_fit_options o;
    hwe_fit_options_init(&o);
    o.regressor = regressor.c_str();
    o.target = target.c_str();
    o.seed = seed;
    o.intercept = intercept == "auto" ? -1 : intercept == "on" ? 1 : 0;
    o.nonnegative = nonnegative ? 1 : 0;
    o.gpr_restarts = restarts;
    o.gpr_max_iterations = max_iterations;
    return o;
  }
};

const std::vector<std::string> kKindNames = {"temporal", "perf_ctc", "valgrind_13pe", "perf", "perfctc", "valgrind", "13pe"};

void check_kind_list(const std::string& list) {
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") continue;
    if (std::find(kKindNames.begin(), kKindNames.end(), item) == kKindNames.end())
      throw UsageError{"unknown feature set '" + item + "'"};
  }
}

class Outputs {
 public:
  Outputs(const Globals& g, const json& resolved) : dir_(g.out_dir), format_(g.format) {
    write_text(dir_ / "resolved_config.json", resolved.dump(2) + "\n");
  }

  void report(const std::string& stem, const hwe_report* r) const {
    if (format_ != "table") write_text(dir_ / (stem + ".json"), hwe_report_json(r));
    if (format_ != "json") write_text(dir_ / (stem + ".txt"), hwe_report_text(r));
    std::cout << (format_ == "json" ? hwe_report_json(r) : hwe_report_text(r));
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
  std::string format_;
};

DatasetHandle load_dataset(const std::string& path) {
  DatasetHandle d;
  check(hwe_dataset_load(path.c_str(), d.out()));
  return d;
}

// ---- ingest --------------------------------------------------------------

struct IngestArgs {
  std::string dataset, id, codec, decoder_name, decoder_kind, sequence, class_label, condition;
  int qp = 0;
  std::string callgrind, perf, hw_log, sw_log;
  std::optional<double> t_dec_sw, energy_hw, energy_sw;
  double max_deviation = 0.02;
  double confidence = 0.99;

  void add(Recorder& rec, CLI::App* app) {
    rec.add(app, "dataset", dataset, "Dataset file to create or append to (.csv or .json)")->required();
    rec.add(app, "id", id, "Record id")->required();
    rec.add(app, "codec", codec, "Codec: AVC, HEVC, VP9, AV1, VVC or AVM")->required();
    rec.add(app, "decoder-name", decoder_name, "Decoder name")->required();
    rec.add(app, "decoder-kind", decoder_kind, "reference or optimized")->required();
    rec.add(app, "sequence", sequence, "Sequence name")->required();
    rec.add(app, "class", class_label, "Sequence class: A1, A2, A3 or B")->required();
    rec.add(app, "qp", qp, "Quantization parameter")->required();
    rec.add(app, "condition", condition, "Coding condition: RA or LB")->required();
    rec.add(app, "callgrind", callgrind, "callgrind output file");
    rec.add(app, "perf", perf, "perf stat -x output file");
    rec.add(app, "t-dec-sw", t_dec_sw, "Software decoding time in seconds");
    rec.add(app, "hw-log", hw_log, "Hardware measurement log (label,repeat_index,joules)");
    rec.add(app, "sw-log", sw_log, "Software measurement log (label,repeat_index,joules)");
    rec.add(app, "energy-hw", energy_hw, "Hardware decoding energy in joules");
    rec.add(app, "energy-sw", energy_sw, "Software decoding energy in joules");
    rec.add(app, "max-deviation", max_deviation, "Confidence check: maximum relative half-width");
    rec.add(app, "confidence", confidence, "Confidence check: confidence level");
  }
};

json energy_from_log(const std::string& path, const IngestArgs& a, const std::string& label) {
  const auto text = read_text(path);
  hwe_energy_sample s{};
  check(hwe_derive_energy_from_log(text.c_str(), a.max_deviation, a.confidence, &s), path);
  std::cout << a.id << ": " << label << " " << s.joules << " J over " << s.n_repeats << " repeats, confidence check "
            << (s.passed_confidence ? "passed" : "FAILED") << "\n";
  return json{{"j", s.joules}, {"repeats", s.n_repeats}, {"confident", s.passed_confidence != 0}};
}

int cmd_ingest(const Globals& g, const IngestArgs& a, const json& resolved) {
  json rec = {{"id", a.id},         {"codec", a.codec}, {"decoder_name", a.decoder_name},
              {"decoder_kind", a.decoder_kind}, {"sequence", a.sequence}, {"class", a.class_label},
              {"qp", a.qp},         {"condition", a.condition}};
  if (a.t_dec_sw) rec["t_dec_sw"] = *a.t_dec_sw;
  if (!a.callgrind.empty()) {
    const auto text = read_text(a.callgrind);
    std::uint64_t counts[HWE_PE_COUNT];
    check(hwe_parse_callgrind(text.c_str(), counts), a.callgrind);
    const char* names[HWE_PE_COUNT] = {"ir", "dr", "dw", "i1mr", "d1mr", "d1mw", "ilmr",
                                       "dlmr", "dlmw", "bc", "bcm", "bi", "bim"};
    for (int i = 0; i < HWE_PE_COUNT; ++i) rec[names[i]] = counts[i];
  }
  if (!a.perf.empty()) {
    const auto text = read_text(a.perf);
    std::uint64_t instructions = 0, cycles = 0;
    double user_time = 0.0;
    check(hwe_parse_perf_stat(text.c_str(), 0, &instructions, &cycles, &user_time), a.perf);
    rec["perf_instructions"] = instructions;
    rec["perf_cycles"] = cycles;
    rec["perf_user_time"] = user_time;
  }
  if (a.energy_hw && !a.hw_log.empty()) throw UsageError{"give either --energy-hw or --hw-log, not both"};
  if (a.energy_sw && !a.sw_log.empty()) throw UsageError{"give either --energy-sw or --sw-log, not both"};
  for (const auto& [prefix, direct, log] :
       {std::tuple{std::string("energy_hw"), a.energy_hw, a.hw_log}, std::tuple{std::string("energy_sw"), a.energy_sw, a.sw_log}}) {
    if (direct) {
      rec[prefix + "_j"] = *direct;
    } else if (!log.empty()) {
      const auto e = energy_from_log(log, a, prefix);
      rec[prefix + "_j"] = e["j"];
      rec[prefix + "_repeats"] = e["repeats"];
      rec[prefix + "_confident"] = e["confident"];
    }
  }

  DatasetHandle ds;
  if (fs::exists(a.dataset)) {
    check(hwe_dataset_load(a.dataset.c_str(), ds.out()));
  } else {
    check(hwe_dataset_new("", ds.out()));
  }
  check(hwe_dataset_append_record_json(ds.get(), rec.dump().c_str()), a.dataset);
  Outputs out(g, resolved);
  check(hwe_dataset_save(ds.get(), a.dataset.c_str()));
  std::cout << "wrote " << a.dataset << " (" << hwe_dataset_size(ds.get()) << " records)\n";
  return kExitOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string dataset, kind = "valgrind_13pe", model;
  FitFlags fit;

  void add(Recorder& rec, CLI::App* app) {
    rec.add(app, "dataset", dataset, "Training dataset")->required();
    rec.add(app, "kind", kind, "Feature set: temporal, perf_ctc or valgrind_13pe")->check(CLI::IsMember(kKindNames));
    fit.add(rec, app, true);
    rec.add(app, "model", model, "Output model path (default <out-dir>/model.json)");
  }
};

int cmd_train(const Globals& g, const TrainArgs& a, const json& resolved) {
  auto ds = load_dataset(a.dataset);
  auto opts = a.fit.options(g.seed);
  opts.kind = a.kind.c_str();
  ModelHandle model;
  check(hwe_model_train(ds.get(), &opts, model.out()));
  Outputs out(g, resolved);
  const auto path = a.model.empty() ? out.path("model.json") : fs::path(a.model);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  check(hwe_model_save(model.get(), path.string().c_str()));
  std::cout << "trained " << hwe_model_regressor(model.get()) << " on " << hwe_model_kind(model.get()) << " ("
            << hwe_dataset_size(ds.get()) << " records), wrote " << path.string() << "\n";
  return kExitOk;
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string dataset, kinds = "all";
  int k = 10;
  bool stratify = false, skip_incomplete = false;
  FitFlags fit;

  void add(Recorder& rec, CLI::App* app) {
    rec.add(app, "dataset", dataset, "Dataset to cross-validate")->required();
    rec.add(app, "kinds", kinds, "Comma-separated feature sets, or all");
    fit.add(rec, app, true);
    rec.add(app, "k", k, "Number of folds")->check(CLI::Range(2, 1000000));
    rec.flag(app, "stratify", stratify, "Stratify folds by sequence class");
    rec.flag(app, "skip-incomplete", skip_incomplete, "Skip decoder/feature-set cells lacking data");
  }
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a, const json& resolved) {
  check_kind_list(a.kinds);
  auto ds = load_dataset(a.dataset);
  hwe_evaluate_options opts;
  hwe_evaluate_options_init(&opts);
  opts.fit = a.fit.options(g.seed);
  opts.kinds = a.kinds.c_str();
  opts.k = a.k;
  opts.stratify = a.stratify ? 1 : 0;
  opts.skip_incomplete = a.skip_incomplete ? 1 : 0;
  ReportHandle report;
  check(hwe_evaluate(ds.get(), &opts, report.out()));
  Outputs out(g, resolved);
  out.report("evaluation", report.get());
  return kExitOk;
}

// ---- cross-predict -------------------------------------------------------

struct CrossArgs {
  std::string train, verify, phase = "7", train_codecs, verify_codec = "AV1", scope = "both",
                                kinds = "valgrind_13pe";
  FitFlags fit;

  void add(Recorder& rec, CLI::App* app) {
    rec.add(app, "train", train, "Training dataset (or the whole corpus when --verify is absent)")->required();
    rec.add(app, "verify", verify, "Verification dataset");
    rec.add(app, "phase", phase, "Phase 1..7, or custom with --train-codecs/--verify-codec");
    rec.add(app, "train-codecs", train_codecs, "Custom phase: comma-separated training codecs");
    rec.add(app, "verify-codec", verify_codec, "Custom phase: verification codec");
    rec.add(app, "scope", scope, "Decoder scope: reference, optimized or both")
        ->check(CLI::IsMember({"reference", "optimized", "both"}));
    rec.add(app, "kinds", kinds, "Comma-separated feature sets, or all");
    fit.add(rec, app, false);
  }
};

int cmd_cross_predict(const Globals& g, const CrossArgs& a, const json& resolved) {
  check_kind_list(a.kinds);
  hwe_phase_options opts;
  hwe_phase_options_init(&opts);
  opts.fit = a.fit.options(g.seed);
  opts.fit.target = "energy_hw";
  if (a.phase == "custom") {
    if (a.train_codecs.empty()) throw UsageError{"--phase custom requires --train-codecs"};
    opts.phase_id = 0;
    opts.training_codecs = a.train_codecs.c_str();
    opts.verification_codec = a.verify_codec.c_str();
  } else {
    int id = 0;
    const auto [ptr, ec] = std::from_chars(a.phase.data(), a.phase.data() + a.phase.size(), id);
    if (ec != std::errc() || ptr != a.phase.data() + a.phase.size() || id < 1 || id > 7)
      throw UsageError{"--phase must be 1..7 or custom, got '" + a.phase + "'"};
    opts.phase_id = id;
  }
  opts.decoder_scope = a.scope.c_str();
  opts.kinds = a.kinds.c_str();
  auto train = load_dataset(a.train);
  DatasetHandle verify;
  if (!a.verify.empty()) check(hwe_dataset_load(a.verify.c_str(), verify.out()));
  ReportHandle report;
  check(hwe_cross_predict(train.get(), verify.get(), &opts, report.out()));
  Outputs out(g, resolved);
  write_text(out.path("scatter.csv"), hwe_report_artifact(report.get(), "scatter_csv"));
  out.report("cross_predict", report.get());
  return kExitOk;
}

// ---- rehwed --------------------------------------------------------------

struct RehwedArgs {
  std::string model, train, train_codecs = "HEVC,VP9,AV1", kind = "valgrind_13pe";
  std::string test, anchor, test_decoder, anchor_decoder, test_label, anchor_label, join = "id";
  FitFlags fit;

  void add(Recorder& rec, CLI::App* app) {
    rec.add(app, "model", model, "Pretrained model file");
    rec.add(app, "train", train, "Dataset to train the model on when --model is absent");
    rec.add(app, "train-codecs", train_codecs, "Training codecs (optimized decoders only)");
    rec.add(app, "kind", kind, "Feature set of a model trained here")->check(CLI::IsMember(kKindNames));
    fit.add(rec, app, false);
    rec.add(app, "test", test, "Test decoder profiles")->required();
    rec.add(app, "anchor", anchor, "Anchor decoder profiles")->required();
    rec.add(app, "test-decoder", test_decoder, "Use only the records of this decoder from --test");
    rec.add(app, "anchor-decoder", anchor_decoder, "Use only the records of this decoder from --anchor");
    rec.add(app, "test-label", test_label, "Test label (default: decoder name or file stem)");
    rec.add(app, "anchor-label", anchor_label, "Anchor label (default: decoder name or file stem)");
    rec.add(app, "join", join, "Pair records by id or by bitstream (sequence, class, qp, condition)")
        ->check(CLI::IsMember({"id", "bitstream"}));
  }
};

DatasetHandle profiles(const std::string& path, const std::string& decoder) {
  auto all = load_dataset(path);
  if (decoder.empty()) return all;
  DatasetHandle subset;
  check(hwe_dataset_filter(all.get(), nullptr, decoder.c_str(), nullptr, subset.out()));
  if (hwe_dataset_size(subset.get()) == 0) throw Failure{HWE_ERR_ID_MISMATCH, path + " has no records of decoder " + decoder};
  return subset;
}

int cmd_rehwed(const Globals& g, const RehwedArgs& a, const json& resolved) {
  if (a.model.empty() == a.train.empty()) throw UsageError{"give exactly one of --model and --train"};
  hwe_rehwed_options opts;
  hwe_rehwed_options_init(&opts);
  opts.fit = a.fit.options(g.seed);
  opts.fit.kind = a.kind.c_str();
  opts.fit.target = "energy_hw";
  opts.codecs = a.train_codecs.c_str();
  opts.join_key = a.join.c_str();
  const std::string test_label =
      !a.test_label.empty() ? a.test_label : !a.test_decoder.empty() ? a.test_decoder : fs::path(a.test).stem().string();
  const std::string anchor_label = !a.anchor_label.empty()   ? a.anchor_label
                                   : !a.anchor_decoder.empty() ? a.anchor_decoder
                                                               : fs::path(a.anchor).stem().string();
  opts.test_label = test_label.c_str();
  opts.anchor_label = anchor_label.c_str();

  ModelHandle model;
  if (!a.model.empty()) {
    check(hwe_model_load(a.model.c_str(), model.out()));
  } else {
    auto train = load_dataset(a.train);
    check(hwe_rehwed_train(train.get(), &opts, model.out()));
  }
  auto test = profiles(a.test, a.test_decoder);
  auto anchor = profiles(a.anchor, a.anchor_decoder);
  ReportHandle report;
  check(hwe_rehwed_compute(model.get(), test.get(), anchor.get(), &opts, report.out()));
  Outputs out(g, resolved);
  if (a.model.empty()) check(hwe_model_save(model.get(), out.path("rehwed_model.json").string().c_str()));
  out.report("rehwed", report.get());
  return kExitOk;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string spec, dataset_name = "dataset.csv";
  std::optional<double> noise;
  std::optional<int> n_bitstreams;

  void add(Recorder& rec, CLI::App* app) {
    rec.add(app, "spec", spec, "Generator spec JSON (default spec when absent)");
    rec.add(app, "noise", noise, "Override noise_sigma_relative");
    rec.add(app, "n-bitstreams", n_bitstreams, "Override n_bitstreams of every decoder");
    rec.add(app, "dataset-name", dataset_name, "Dataset file name inside --out-dir (.csv or .json)");
  }
};

int cmd_synth(const Globals& g, const SynthArgs& a, json resolved) {
  json spec;
  if (a.spec.empty()) {
    OwnedString def;
    check(hwe_synth_default_spec(&def.ptr));
    spec = json::parse(def.str());
  } else {
    try {
      spec = json::parse(read_text(a.spec));
    } catch (const json::exception& e) {
      throw Failure{HWE_ERR_INVALID_SPEC, a.spec + ": " + e.what()};
    }
    if (!spec.is_object()) throw Failure{HWE_ERR_INVALID_SPEC, a.spec + ": generator spec must be a JSON object"};
  }
  spec["seed"] = g.seed;
  if (a.noise) spec["noise_sigma_relative"] = *a.noise;
  if (a.n_bitstreams) {
    spec["n_bitstreams"] = *a.n_bitstreams;
    if (spec.contains("decoders") && spec["decoders"].is_array())
      for (auto& d : spec["decoders"])
        if (d.is_object()) d["n_bitstreams"] = *a.n_bitstreams;
  }
  DatasetHandle ds;
  ReportHandle truth;
  check(hwe_synth(spec.dump().c_str(), nullptr, ds.out(), truth.out()));
  Outputs out(g, resolved);
  const auto path = out.path(a.dataset_name);
  check(hwe_dataset_save(ds.get(), path.string().c_str()));
  write_text(out.path("ground_truth.json"), hwe_report_json(truth.get()));
  std::cout << "wrote " << path.string() << ": " << hwe_report_text(truth.get());
  return kExitOk;
}

// Expands --config FILE into arguments placed right after the subcommand
// name, ahead of the user's own arguments, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args, const std::vector<std::string>& subcommands) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    }
  }
  if (!path) return args;
  json cfg;
  try {
    cfg = json::parse(read_text(*path));
  } catch (const json::exception& e) {
    throw UsageError{"config " + *path + ": " + e.what()};
  }
  if (!cfg.is_object()) throw UsageError{"config " + *path + " must be a JSON object"};

  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i)
    if (std::find(subcommands.begin(), subcommands.end(), args[i]) != subcommands.end()) {
      sub_pos = i;
      break;
    }
  if (sub_pos == args.size()) {
    if (!cfg.contains("subcommand") || !cfg["subcommand"].is_string())
      throw UsageError{"no subcommand given on the command line or in " + *path};
    // Global options are accepted after the subcommand, so it can lead.
    args.insert(args.begin(), cfg["subcommand"].get<std::string>());
    sub_pos = 0;
  }

  std::vector<std::string> injected;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "subcommand" || key == "config" || value.is_null()) continue;
    if (value.is_boolean()) {
      injected.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
    } else if (value.is_string()) {
      // An empty string stands for an unset option.
      if (value.get<std::string>().empty()) continue;
      injected.push_back("--" + key + "=" + value.get<std::string>());
    } else if (value.is_number()) {
      injected.push_back("--" + key + "=" + value.dump());
    } else {
      throw UsageError{"config key '" + key + "' must be a string, number or boolean"};
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware video decoder energy modeling from software profiling features", "hwenergy"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", hwe_version());

  Recorder rec;
  Globals g;
  rec.add(&app, "seed", g.seed, "Seed for all randomness");
  app.add_option("--config", g.config, "JSON file of option values keyed by flag name; flags override it");
  rec.add(&app, "out-dir", g.out_dir, "Output directory");
  rec.add(&app, "format", g.format, "Report output: json, table or both")->check(CLI::IsMember({"json", "table", "both"}));

  IngestArgs ingest;
  TrainArgs train;
  EvaluateArgs evaluate;
  CrossArgs cross;
  RehwedArgs rehwed;
  SynthArgs synth;
  auto* c_ingest = app.add_subcommand("ingest", "Add one profiled bitstream to a dataset");
  auto* c_train = app.add_subcommand("train", "Train and save an energy model");
  auto* c_evaluate = app.add_subcommand("evaluate", "k-fold cross-validation per decoder and feature set");
  auto* c_cross = app.add_subcommand("cross-predict", "Cross-codec prediction with calibration");
  auto* c_rehwed = app.add_subcommand("rehwed", "Relative expected hardware energy demand of two decoders");
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted ground truth");
  ingest.add(rec, c_ingest);
  train.add(rec, c_train);
  evaluate.add(rec, c_evaluate);
  cross.add(rec, c_cross);
  rehwed.add(rec, c_rehwed);
  synth.add(rec, c_synth);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args), {"ingest", "train", "evaluate", "cross-predict", "rehwed", "synth"});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "hwenergy: " << e.message << "\n";
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "hwenergy: " << hwe_status_name(f.status) << ": " << f.message << "\n";
    return kExitData;
  }

  CLI::App* sub = app.get_subcommands().front();
  const json resolved = rec.resolve(&app, sub);
  try {
    if (sub == c_ingest) return cmd_ingest(g, ingest, resolved);
    if (sub == c_train) return cmd_train(g, train, resolved);
    if (sub == c_evaluate) return cmd_evaluate(g, evaluate, resolved);
    if (sub == c_cross) return cmd_cross_predict(g, cross, resolved);
    if (sub == c_rehwed) return cmd_rehwed(g, rehwed, resolved);
    return cmd_synth(g, synth, resolved);
  } catch (const UsageError& e) {
    std::cerr << "hwenergy: " << e.message << "\n";
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "hwenergy: " << hwe_status_name(f.status) << ": " << f.message << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "hwenergy: " << e.what() << "\n";
    return kExitData;
  }
}
