#pragma once

#include <string>

#include <doctest.h>

#include "core/error.hpp"
#include "core/types.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(HWE_FIXTURES) + "/" + name; }

// Runs body and returns the library error code it raised.
template <typename F>
hwenergy::ErrorCode error_of(F&& body) {
  try {
    body();
  } catch (const hwenergy::Error& e) {
    return e.code();
  }
  FAIL("expected an hwenergy::Error");
  return hwenergy::ErrorCode::InvalidArgument;
}

// Message of the error raised by body, or "" when none.
template <typename F>
std::string message_of(F&& body) {
  try {
    body();
  } catch (const hwenergy::Error& e) {
    return e.what();
  }
  return {};
}

inline hwenergy::BitstreamRecord make_record(const std::string& id, hwenergy::Codec codec = hwenergy::Codec::AV1) {
  hwenergy::BitstreamRecord r;
  r.id = id;
  r.codec = codec;
  r.decoder_name = "dav1d";
  r.decoder_kind = hwenergy::DecoderKind::Optimized;
  r.sequence = "seq";
  r.qp = 32;
  r.temporal = hwenergy::TemporalFeature{1.0};
  return r;
}

}  // namespace testing
