#pragma once

#include <string_view>

#include "core/types.hpp"

namespace hwenergy::ingest {

struct ConfidenceCheckResult {
  bool passed = false;
  double relative_halfwidth = 0.0;  // fraction of the mean
  double mean = 0.0;                // joules
  int n = 0;
};

// Two-sided Student-t interval on the mean: the half-width
// t_{(1+confidence)/2, n-1} * s / sqrt(n), relative to the mean, must stay
// below max_deviation. Errors: TooFewSamples (n < 2), ZeroMean (mean <= 0).
ConfidenceCheckResult confidence_check(const MeasurementSeries& series,
                                       double max_deviation = 0.02,
                                       double confidence = 0.99);

// Pure decoding energy from alternating active/idle measurements: the
// difference of the two means. The sample passes confidence only when both
// series pass; a series too short or degenerate to test counts as failing.
// Errors: EmptySeries, NegativeEnergy, InvalidArgument (labels swapped).
EnergySample derive_decoding_energy(const MeasurementSeries& active,
                                    const MeasurementSeries& idle,
                                    MeasurementSetup setup = MeasurementSetup::MSH,
                                    double max_deviation = 0.02,
                                    double confidence = 0.99);

struct MeasurementLog {
  MeasurementSeries active{{}, SeriesLabel::Active};
  MeasurementSeries idle{{}, SeriesLabel::Idle};
};

// CSV `label,repeat_index,<energy column>` where the energy column header
// selects the unit: joules|j|ws|watt_seconds (1 J) or mwh|milliwatt_hours
// (3.6 J). Rows are ordered by repeat_index within each label.
MeasurementLog parse_measurement_log(std::string_view text);

}  // namespace hwenergy::ingest
