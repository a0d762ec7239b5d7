#pragma once

#include <string_view>

#include "core/types.hpp"

namespace hwenergy::ingest {

// Reads the program totals of a callgrind (or cachegrind) profile produced
// with cache and branch simulation enabled. Counters are located by name in
// the `events:` header, so the header order is irrelevant. The `summary:`
// line is preferred; `totals:` is the fallback.
//
// Errors: MalformedHeader (no/duplicate events header, no totals line, more
// totals than events), MissingEvent (one of the 13 counters is absent, which
// means --simulate-cache or --branch-sim was off), NonNumericTotal.
ProcessorEventVector parse_callgrind(std::string_view text);

}  // namespace hwenergy::ingest
