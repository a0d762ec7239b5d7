#include "ingest/callgrind.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace hwenergy::ingest {
namespace {

// Returns the value part when line is "<key>:<value>".
std::optional<std::string_view> field(std::string_view line, std::string_view key) {
  line = text::trim(line);
  if (line.size() <= key.size() || line.substr(0, key.size()) != key || line[key.size()] != ':')
    return std::nullopt;
  return line.substr(key.size() + 1);
}

}  // namespace

ProcessorEventVector parse_callgrind(std::string_view text) {
  std::optional<std::vector<std::string_view>> events;
  std::optional<std::string_view> summary;
  std::optional<std::string_view> totals;
  std::size_t summary_line = 0;
  std::size_t totals_line = 0;

  const auto lines = text::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (auto v = field(line, "events")) {
      auto names = text::split_whitespace(*v);
      if (events && *events != names)
        fail(ErrorCode::MalformedHeader, "conflicting events: headers at line " + std::to_string(i + 1));
      events = std::move(names);
    } else if (auto s = field(line, "summary"); s && !summary) {
      summary = s;
      summary_line = i + 1;
    } else if (auto t = field(line, "totals"); t && !totals) {
      totals = t;
      totals_line = i + 1;
    }
  }

  if (!events || events->empty()) fail(ErrorCode::MalformedHeader, "no events: header line");
  for (std::size_t i = 0; i < events->size(); ++i)
    for (std::size_t j = i + 1; j < events->size(); ++j)
      if ((*events)[i] == (*events)[j])
        fail(ErrorCode::MalformedHeader, "event '" + std::string((*events)[i]) + "' listed twice");

  const auto cost_text = summary ? summary : totals;
  const std::size_t cost_line = summary ? summary_line : totals_line;
  if (!cost_text) fail(ErrorCode::MalformedHeader, "no summary: or totals: line");

  const auto tokens = text::split_whitespace(*cost_text);
  if (tokens.size() > events->size())
    fail(ErrorCode::MalformedHeader, "line " + std::to_string(cost_line) + " has " +
                                         std::to_string(tokens.size()) + " totals for " +
                                         std::to_string(events->size()) + " events");
  // Trailing zero costs may be omitted.
  std::vector<std::uint64_t> values(events->size(), 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto v = text::parse_u64(tokens[i]);
    if (!v)
      fail(ErrorCode::NonNumericTotal, "line " + std::to_string(cost_line) + ": total '" +
                                           std::string(tokens[i]) + "' for event '" +
                                           std::string((*events)[i]) + "' is not a count");
    values[i] = *v;
  }

  ProcessorEventVector::Counts counts{};
  for (std::size_t k = 0; k < kPeEventCount; ++k) {
    const auto it = std::find(events->begin(), events->end(), kCallgrindEventNames[k]);
    if (it == events->end())
      fail(ErrorCode::MissingEvent, "callgrind profile lacks event '" +
                                        std::string(kCallgrindEventNames[k]) +
                                        "' (cache and branch simulation must be enabled)");
    counts[k] = values[static_cast<std::size_t>(it - events->begin())];
  }
  return ProcessorEventVector(counts);
}

}  // namespace hwenergy::ingest
