#include "ingest/perf_stat.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace hwenergy::ingest {
namespace {

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(text::trim(line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// "instructions:u" -> "instructions", "cpu_core/instructions/u" -> "instructions"
std::string normalize_event(std::string_view ev) {
  if (const auto slash = ev.find('/'); slash != std::string_view::npos) {
    const auto end = ev.find('/', slash + 1);
    ev = ev.substr(slash + 1, end == std::string_view::npos ? std::string_view::npos : end - slash - 1);
  }
  if (const auto colon = ev.find(':'); colon != std::string_view::npos) ev = ev.substr(0, colon);
  std::string out(text::trim(ev));
  for (auto& c : out)
    if (c == '-') c = '_';
  return out;
}

bool is_user_time(const std::string& ev) {
  return ev == "user_time" || ev == "seconds user" || ev == "seconds_user" || ev == "user";
}

std::uint64_t parse_count(std::string_view raw, char sep, std::size_t line_no) {
  std::string cleaned;
  for (char c : raw)
    if (c != '\'' && c != '_' && !(c == ',' && sep != ',') && c != ' ') cleaned += c;
  if (auto v = text::parse_u64(cleaned)) return *v;
  // Some events are printed with a fractional part (e.g. "12345.00").
  if (auto d = text::parse_double(cleaned); d && *d >= 0.0 && std::floor(*d) == *d && *d < 1.8e19)
    return static_cast<std::uint64_t>(*d);
  fail(ErrorCode::NonNumericValue,
       "line " + std::to_string(line_no) + ": counter value '" + std::string(raw) + "' is not numeric");
}

double seconds_from(std::string_view raw, std::string_view unit, std::size_t line_no) {
  const auto v = text::parse_double(raw);
  if (!v || !std::isfinite(*v) || *v < 0.0)
    fail(ErrorCode::NonNumericValue,
         "line " + std::to_string(line_no) + ": user time '" + std::string(raw) + "' is not numeric");
  if (unit.empty() || unit == "s" || unit == "sec" || unit == "seconds") return *v;
  if (unit == "ms" || unit == "msec") return *v * 1e-3;
  if (unit == "us" || unit == "usec") return *v * 1e-6;
  if (unit == "ns" || unit == "nsec") return *v * 1e-9;
  fail(ErrorCode::NonNumericValue,
       "line " + std::to_string(line_no) + ": unknown time unit '" + std::string(unit) + "'");
}

char detect_separator(const std::vector<std::string_view>& lines) {
  for (const auto line : lines) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    for (char c : {',', ';', '\t', '|'})
      if (t.find(c) != std::string_view::npos) return c;
  }
  return ',';
}

}  // namespace

PerfCtcFeatures parse_perf_stat(std::string_view text, std::optional<char> separator) {
  const auto lines = text::split_lines(text);
  const char sep = separator.value_or(detect_separator(lines));

  std::optional<std::uint64_t> instructions;
  std::optional<std::uint64_t> cycles;
  std::optional<double> user_time;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_on(line, sep);
    if (fields.size() < 3) continue;
    const std::string event = normalize_event(fields[2]);
    const std::size_t line_no = i + 1;
    if (event == "instructions") {
      instructions = instructions.value_or(0) + parse_count(fields[0], sep, line_no);
    } else if (event == "cycles" || event == "cpu_cycles") {
      cycles = cycles.value_or(0) + parse_count(fields[0], sep, line_no);
    } else if (is_user_time(event)) {
      user_time = user_time.value_or(0.0) + seconds_from(fields[0], fields[1], line_no);
    }
  }

  if (!instructions) fail(ErrorCode::MissingCounter, "perf output lacks the 'instructions' counter");
  if (!cycles) fail(ErrorCode::MissingCounter, "perf output lacks the 'cycles' counter");
  if (!user_time) fail(ErrorCode::MissingCounter, "perf output lacks a user time line ('user_time')");
  PerfCtcFeatures out{*instructions, *cycles, *user_time};
  out.validate();
  return out;
}

}  // namespace hwenergy::ingest
