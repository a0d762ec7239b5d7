#include "ingest/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace hwenergy::ingest {
namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_nonnegative(const MeasurementSeries& s) {
  for (double v : s.values)
    if (!std::isfinite(v) || v < 0.0)
      fail(ErrorCode::InvalidArgument, "energy readings must be finite and >= 0 J");
}

}  // namespace

ConfidenceCheckResult confidence_check(const MeasurementSeries& series, double max_deviation,
                                       double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    fail(ErrorCode::InvalidArgument, "confidence must lie in (0, 1)");
  if (!(max_deviation > 0.0)) fail(ErrorCode::InvalidArgument, "max_deviation must be > 0");
  const auto& v = series.values;
  if (v.size() < 2)
    fail(ErrorCode::TooFewSamples, "confidence check needs at least 2 readings, got " +
                                       std::to_string(v.size()));
  require_nonnegative(series);

  const double n = static_cast<double>(v.size());
  const double mean = mean_of(v);
  if (!(mean > 0.0)) fail(ErrorCode::ZeroMean, "series mean is zero");

  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.5 * (1.0 + confidence));
  const double rel = t * sd / (std::sqrt(n) * mean);

  return {rel < max_deviation, rel, mean, static_cast<int>(v.size())};
}

EnergySample derive_decoding_energy(const MeasurementSeries& active, const MeasurementSeries& idle,
                                    MeasurementSetup setup, double max_deviation,
                                    double confidence) {
  if (active.label != SeriesLabel::Active || idle.label != SeriesLabel::Idle)
    fail(ErrorCode::InvalidArgument, "expected an active and an idle series");
  if (active.values.empty() || idle.values.empty())
    fail(ErrorCode::EmptySeries, "active and idle series must both be nonempty");
  require_nonnegative(active);
  require_nonnegative(idle);

  const double a = mean_of(active.values);
  const double i = mean_of(idle.values);
  if (a < i) {
    fail(ErrorCode::NegativeEnergy, "mean active energy " + text::format_double(a) +
                                        " J is below mean idle energy " + text::format_double(i) +
                                        " J (corrupted or swapped series?)");
  }

  auto passes = [&](const MeasurementSeries& s) {
    try {
      return confidence_check(s, max_deviation, confidence).passed;
    } catch (const Error&) {
      return false;
    }
  };

  EnergySample out;
  out.joules = a - i;
  out.setup = setup;
  out.n_repeats = static_cast<int>(std::min(active.values.size(), idle.values.size()));
  out.passed_confidence = passes(active) && passes(idle);
  return out;
}

MeasurementLog parse_measurement_log(std::string_view doc) {
  const auto rows = text::parse_csv(doc);
  if (rows.empty()) fail(ErrorCode::RowParseError, "measurement log is empty");

  const auto& header = rows.front().cells;
  if (header.size() != 3 || text::trim(header[0]) != "label" || text::trim(header[1]) != "repeat_index")
    fail(ErrorCode::SchemaViolation, "measurement log header must be label,repeat_index,<unit>");
  const std::string unit(text::trim(header[2]));
  double to_joules = 0.0;
  if (unit == "joules" || unit == "j" || unit == "ws" || unit == "watt_seconds") {
    to_joules = 1.0;
  } else if (unit == "mwh" || unit == "milliwatt_hours") {
    to_joules = 3.6;
  } else {
    fail(ErrorCode::SchemaViolation, "unknown energy unit column '" + unit + "'");
  }

  std::vector<std::pair<std::int64_t, double>> active;
  std::vector<std::pair<std::int64_t, double>> idle;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "row at line " + std::to_string(row.line);
    if (row.cells.size() != 3) fail(ErrorCode::RowParseError, where + ": expected 3 cells");
    const SeriesLabel label = parse_series_label(text::trim(row.cells[0]));
    const auto idx = text::parse_i64(row.cells[1]);
    const auto value = text::parse_double(row.cells[2]);
    if (!idx || !value || !std::isfinite(*value) || *value < 0.0)
      fail(ErrorCode::RowParseError, where + ": malformed repeat index or energy");
    (label == SeriesLabel::Active ? active : idle).emplace_back(*idx, *value * to_joules);
  }

  auto to_series = [](std::vector<std::pair<std::int64_t, double>> v, SeriesLabel label) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    MeasurementSeries s{{}, label};
    for (const auto& [idx, val] : v) s.values.push_back(val);
    return s;
  };
  return {to_series(std::move(active), SeriesLabel::Active), to_series(std::move(idle), SeriesLabel::Idle)};
}

}  // namespace hwenergy::ingest
