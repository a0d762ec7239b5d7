#include "ingest/dataset_io.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace hwenergy::ingest {
namespace {

using nlohmann::json;

constexpr std::string_view kProvenancePrefix = "# provenance: ";

const std::array<std::string_view, 9> kRequiredColumns = {
    "id", "codec", "decoder_name", "decoder_kind", "sequence", "class", "qp", "condition", "t_dec_sw"};

// Uniform cell access over CSV rows and JSON objects: an absent optional is
// std::nullopt in both representations.
class CellSource {
 public:
  virtual ~CellSource() = default;
  virtual std::optional<std::string> text(std::string_view col) const = 0;
  virtual std::optional<double> number(std::string_view col) const = 0;
  virtual std::optional<std::uint64_t> count(std::string_view col) const = 0;
  virtual std::optional<bool> flag(std::string_view col) const = 0;
  virtual std::string where() const = 0;
};

[[noreturn]] void row_error(const CellSource& src, std::string_view col, std::string_view why) {
  fail(ErrorCode::RowParseError, src.where() + ", column '" + std::string(col) + "': " + std::string(why));
}

class CsvCells final : public CellSource {
 public:
  CsvCells(const std::map<std::string, std::size_t, std::less<>>& index, const text::CsvRow& row)
      : index_(index), row_(row) {}

  std::optional<std::string> text(std::string_view col) const override {
    const auto it = index_.find(col);
    if (it == index_.end() || it->second >= row_.cells.size()) return std::nullopt;
    const auto cell = text::trim(row_.cells[it->second]);
    if (cell.empty()) return std::nullopt;
    return std::string(cell);
  }
  std::optional<double> number(std::string_view col) const override {
    const auto t = text(col);
    if (!t) return std::nullopt;
    const auto v = text::parse_double(*t);
    if (!v || !std::isfinite(*v)) row_error(*this, col, "'" + *t + "' is not a finite number");
    return v;
  }
  std::optional<std::uint64_t> count(std::string_view col) const override {
    const auto t = text(col);
    if (!t) return std::nullopt;
    const auto v = text::parse_u64(*t);
    if (!v) row_error(*this, col, "'" + *t + "' is not a nonnegative integer");
    return v;
  }
  std::optional<bool> flag(std::string_view col) const override {
    const auto t = text(col);
    if (!t) return std::nullopt;
    if (*t == "1" || *t == "true") return true;
    if (*t == "0" || *t == "false") return false;
    row_error(*this, col, "'" + *t + "' is not a boolean");
  }
  std::string where() const override { return "row at line " + std::to_string(row_.line); }

 private:
  const std::map<std::string, std::size_t, std::less<>>& index_;
  const text::CsvRow& row_;
};

class JsonCells final : public CellSource {
 public:
  JsonCells(const json& obj, std::size_t index) : obj_(obj), index_(index) {}

  std::optional<std::string> text(std::string_view col) const override {
    const json* v = get(col);
    if (!v) return std::nullopt;
    if (v->is_string()) return v->get<std::string>();
    if (v->is_number_integer() || v->is_number_unsigned()) return v->dump();
    row_error(*this, col, "expected a string");
  }
  std::optional<double> number(std::string_view col) const override {
    const json* v = get(col);
    if (!v) return std::nullopt;
    if (!v->is_number()) row_error(*this, col, "expected a number");
    return v->get<double>();
  }
  std::optional<std::uint64_t> count(std::string_view col) const override {
    const json* v = get(col);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      row_error(*this, col, "expected a nonnegative integer");
    return v->get<std::uint64_t>();
  }
  std::optional<bool> flag(std::string_view col) const override {
    const json* v = get(col);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) row_error(*this, col, "expected a boolean");
    return v->get<bool>();
  }
  std::string where() const override { return "record #" + std::to_string(index_ + 1); }

 private:
  const json* get(std::string_view col) const {
    const auto it = obj_.find(std::string(col));
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }
  const json& obj_;
  std::size_t index_;
};

std::string required_text(const CellSource& src, std::string_view col) {
  auto t = src.text(col);
  if (!t) row_error(src, col, "required value is empty");
  return *t;
}

template <typename Parse>
auto parse_enum(const CellSource& src, std::string_view col, Parse parse) {
  const auto t = required_text(src, col);
  try {
    return parse(t);
  } catch (const Error& e) {
    fail(ErrorCode::SchemaViolation, src.where() + ": " + e.what());
  }
}

std::optional<EnergySample> read_energy(const CellSource& src, std::string_view prefix,
                                        MeasurementSetup setup) {
  const std::string p(prefix);
  const auto joules = src.number(p + "_j");
  const auto repeats = src.count(p + "_repeats");
  const auto confident = src.flag(p + "_confident");
  if (!joules) {
    if (repeats || confident) row_error(src, p + "_j", "metadata given without an energy value");
    return std::nullopt;
  }
  EnergySample e;
  e.joules = *joules;
  e.setup = setup;
  e.n_repeats = static_cast<int>(repeats.value_or(1));
  e.passed_confidence = confident.value_or(false);
  return e;
}

BitstreamRecord read_record(const CellSource& src) {
  BitstreamRecord r;
  r.id = required_text(src, "id");
  r.codec = parse_enum(src, "codec", parse_codec);
  r.decoder_name = required_text(src, "decoder_name");
  r.decoder_kind = parse_enum(src, "decoder_kind", parse_decoder_kind);
  r.sequence = required_text(src, "sequence");
  r.class_label = parse_enum(src, "class", parse_sequence_class);
  {
    const auto qp = text::parse_i64(required_text(src, "qp"));
    if (!qp || *qp < -1000 || *qp > 1000) row_error(src, "qp", "not an integer");
    r.qp = static_cast<int>(*qp);
  }
  r.condition = parse_enum(src, "condition", parse_condition);

  if (const auto t = src.number("t_dec_sw")) r.temporal = TemporalFeature{*t};

  const auto instr = src.count("perf_instructions");
  const auto cycles = src.count("perf_cycles");
  const auto utime = src.number("perf_user_time");
  const int perf_present = int(instr.has_value()) + int(cycles.has_value()) + int(utime.has_value());
  if (perf_present == 3) {
    r.perf = PerfCtcFeatures{*instr, *cycles, *utime};
  } else if (perf_present != 0) {
    row_error(src, "perf_*", "perf features must be all present or all empty");
  }

  ProcessorEventVector::Counts counts{};
  std::size_t pe_present = 0;
  for (std::size_t k = 0; k < kPeEventCount; ++k) {
    if (const auto c = src.count(kPeColumnNames[k])) {
      counts[k] = *c;
      ++pe_present;
    }
  }
  if (pe_present == kPeEventCount) {
    try {
      r.valgrind = ProcessorEventVector(counts);
    } catch (const Error& e) {
      fail(e.code(), src.where() + ": " + e.what());
    }
  } else if (pe_present != 0) {
    row_error(src, "ir..bim", "processor events must be all present or all empty");
  }

  r.energy_sw = read_energy(src, "energy_sw", MeasurementSetup::MSS);
  r.energy_hw = read_energy(src, "energy_hw", MeasurementSetup::MSH);
  try {
    r.validate();
  } catch (const Error& e) {
    fail(e.code(), src.where() + ": " + e.what());
  }
  return r;
}

Dataset finish(std::vector<BitstreamRecord> records, std::string provenance,
               const std::vector<std::string>& wheres) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!seen.insert(records[i].id).second)
      fail(ErrorCode::DuplicateId, wheres[i] + ": duplicate id '" + records[i].id + "'");
  return Dataset(std::move(records), std::move(provenance));
}

Dataset load_csv(std::string_view doc) {
  std::string provenance;
  for (const auto line : text::split_lines(doc)) {
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.starts_with("# provenance:")) {
      provenance = std::string(text::trim(t.substr(13)));
      continue;
    }
    if (t.front() != '#') break;
  }

  const auto rows = text::parse_csv(doc);
  if (rows.empty()) fail(ErrorCode::SchemaViolation, "dataset CSV has no header row");
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < rows.front().cells.size(); ++i)
    index.emplace(std::string(text::trim(rows.front().cells[i])), i);
  for (const auto col : kRequiredColumns)
    if (!index.contains(col))
      fail(ErrorCode::SchemaViolation, "dataset CSV lacks column '" + std::string(col) + "'");

  std::vector<BitstreamRecord> records;
  std::vector<std::string> wheres;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].cells.size() != rows.front().cells.size())
      fail(ErrorCode::RowParseError, "row at line " + std::to_string(rows[r].line) + ": expected " +
                                         std::to_string(rows.front().cells.size()) + " cells, got " +
                                         std::to_string(rows[r].cells.size()));
    CsvCells cells(index, rows[r]);
    records.push_back(read_record(cells));
    wheres.push_back(cells.where());
  }
  return finish(std::move(records), std::move(provenance), wheres);
}

Dataset load_json(std::string_view doc) {
  json root;
  try {
    root = json::parse(doc);
  } catch (const json::exception& e) {
    fail(ErrorCode::RowParseError, std::string("dataset JSON: ") + e.what());
  }
  std::string provenance;
  const json* list = &root;
  if (root.is_object()) {
    if (const auto it = root.find("provenance"); it != root.end() && it->is_string())
      provenance = it->get<std::string>();
    const auto it = root.find("records");
    if (it == root.end()) fail(ErrorCode::SchemaViolation, "dataset JSON lacks 'records'");
    list = &*it;
  }
  if (!list->is_array()) fail(ErrorCode::SchemaViolation, "dataset JSON records must be an array");

  std::vector<BitstreamRecord> records;
  std::vector<std::string> wheres;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& obj = (*list)[i];
    if (!obj.is_object()) fail(ErrorCode::SchemaViolation, "record #" + std::to_string(i + 1) + " is not an object");
    JsonCells cells(obj, i);
    records.push_back(read_record(cells));
    wheres.push_back(cells.where());
  }
  return finish(std::move(records), std::move(provenance), wheres);
}

std::string fmt_opt(const std::optional<double>& v) { return v ? text::format_double(*v) : ""; }

}  // namespace

Dataset load_dataset(std::string_view document, DatasetFormat format) {
  if (format == DatasetFormat::Auto) {
    const auto t = text::trim(document);
    format = (!t.empty() && (t.front() == '{' || t.front() == '[')) ? DatasetFormat::Json : DatasetFormat::Csv;
  }
  return format == DatasetFormat::Json ? load_json(document) : load_csv(document);
}

Dataset load_dataset_file(const std::string& path) {
  try {
    return load_dataset(text::read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    fail(e.code(), path + ": " + e.what());
  }
}

std::string write_dataset_csv(const Dataset& ds) {
  std::ostringstream out;
  if (!ds.provenance().empty()) {
    std::string prov = ds.provenance();
    for (auto& c : prov)
      if (c == '\n' || c == '\r') c = ' ';
    out << kProvenancePrefix << prov << '\n';
  }
  out << kDatasetCsvHeader << '\n';
  for (const auto& r : ds.records()) {
    out << text::csv_escape(r.id) << ',' << to_string(r.codec) << ',' << text::csv_escape(r.decoder_name)
        << ',' << to_string(r.decoder_kind) << ',' << text::csv_escape(r.sequence) << ','
        << to_string(r.class_label) << ',' << r.qp << ',' << to_string(r.condition) << ',';
    out << (r.temporal ? text::format_double(r.temporal->t_dec_sw) : "") << ',';
    if (r.perf)
      out << r.perf->instructions << ',' << r.perf->cycles << ',' << text::format_double(r.perf->user_time);
    else
      out << ",,";
    for (std::size_t k = 0; k < kPeEventCount; ++k) {
      out << ',';
      if (r.valgrind) out << r.valgrind->counts()[k];
    }
    auto energy = [](const std::optional<EnergySample>& e) { return e ? std::optional<double>(e->joules) : std::nullopt; };
    out << ',' << fmt_opt(energy(r.energy_sw)) << ',' << fmt_opt(energy(r.energy_hw));
    for (const auto* e : {&r.energy_sw, &r.energy_hw}) {
      out << ',';
      if (*e) out << (*e)->n_repeats;
      out << ',';
      if (*e) out << ((*e)->passed_confidence ? "true" : "false");
    }
    out << '\n';
  }
  return out.str();
}

std::string write_dataset_json(const Dataset& ds) {
  json records = json::array();
  for (const auto& r : ds.records()) {
    json o = json::object();
    o["id"] = r.id;
    o["codec"] = to_string(r.codec);
    o["decoder_name"] = r.decoder_name;
    o["decoder_kind"] = to_string(r.decoder_kind);
    o["sequence"] = r.sequence;
    o["class"] = to_string(r.class_label);
    o["qp"] = r.qp;
    o["condition"] = to_string(r.condition);
    o["t_dec_sw"] = r.temporal ? json(r.temporal->t_dec_sw) : json(nullptr);
    o["perf_instructions"] = r.perf ? json(r.perf->instructions) : json(nullptr);
    o["perf_cycles"] = r.perf ? json(r.perf->cycles) : json(nullptr);
    o["perf_user_time"] = r.perf ? json(r.perf->user_time) : json(nullptr);
    for (std::size_t k = 0; k < kPeEventCount; ++k)
      o[std::string(kPeColumnNames[k])] = r.valgrind ? json(r.valgrind->counts()[k]) : json(nullptr);
    auto put_energy = [&](const std::optional<EnergySample>& e, const std::string& p) {
      o[p + "_j"] = e ? json(e->joules) : json(nullptr);
      o[p + "_repeats"] = e ? json(e->n_repeats) : json(nullptr);
      o[p + "_confident"] = e ? json(e->passed_confidence) : json(nullptr);
    };
    put_energy(r.energy_sw, "energy_sw");
    put_energy(r.energy_hw, "energy_hw");
    records.push_back(std::move(o));
  }
  json root = json::object();
  root["provenance"] = ds.provenance();
  root["records"] = std::move(records);
  return root.dump(2) + "\n";
}

void save_dataset_file(const Dataset& dataset, const std::string& path) {
  const bool as_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  text::write_file(path, as_json ? write_dataset_json(dataset) : write_dataset_csv(dataset));
}

}  // namespace hwenergy::ingest
