#pragma once

#include <optional>
#include <string_view>

#include "core/types.hpp"

namespace hwenergy::ingest {

// Parses `perf stat -x<sep>` output: <value><sep><unit><sep><event>[<sep>...].
// Event names may carry modifiers (`instructions:u`, `cpu_core/cycles/`);
// repeated events (hybrid core types) are summed. User time is read from a
// line whose event is `user_time`, `user-time` or `seconds user`, honouring
// the unit field (s, ms, us, ns). Grouping characters (' _ and the comma when
// it is not the separator) are stripped from counts. Lines starting with '#'
// are ignored. The separator is auto-detected from ",;\t|" when not given.
//
// Errors: MissingCounter, NonNumericValue (including <not counted>).
PerfCtcFeatures parse_perf_stat(std::string_view text, std::optional<char> separator = std::nullopt);

}  // namespace hwenergy::ingest
