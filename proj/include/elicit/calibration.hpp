#pragma once

#include <optional>
#include <vector>

#include "elicit/pareto.hpp"

namespace elicit {

// One prediction bin of the binned identification-value diagnostic. The bin
// is the event {prediction in [lo, hi)} (the last bin is right-closed at the
// max prediction). Calibration requires the average identification value to
// be <= 0 at the left edge and >= 0 at the right edge, up to sampling noise:
//   mean_v       = average of V(lo, y_i) over members, tested <=  z * se_left
//   mean_v_right = average of V(hi', y_i) over members, tested >= -z * se_right
// where hi' is the next bin's left edge (exact) or, for the last bin,
// hi + delta_right(hi) as a right-limit stand-in.
struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
  double mean_v = 0.0;
  double mean_v_right = 0.0;
  double se_left = 0.0;
  double se_right = 0.0;
  // Violation z-score: how many standard errors the bin breaks its bounds by
  // (0 when both one-sided checks hold). Infinite when a bound is broken
  // with zero standard error.
  double violation = 0.0;
  bool pass = true;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  // Max violation z-score across bins, so pass <=> overall <= z_threshold.
  double overall = 0.0;
  double z_threshold = 3.0;
  bool pass = true;
  // Whether the theoretical calibration guarantee applies to the model the
  // predictions came from (set by theorem1_harness; true for standalone use).
  bool applicable = true;
};

enum class BinningMode {
  EqualCount,  // default: edges at prediction order statistics
  EqualWidth,  // evenly spaced edges over the prediction range
};

// Binned diagnostic over (prediction, observation) pairs. Bin count defaults
// to 10; requires n >= 5 * bins (WidthError otherwise). All-equal
// predictions collapse to a single two-sided bin at that point.
CalibrationReport calibration_diagnostic(const FunctionalSpec& spec,
                                         const Eigen::VectorXd& predictions,
                                         const Eigen::VectorXd& y,
                                         int bins = 10,
                                         BinningMode mode = BinningMode::EqualCount,
                                         double z_threshold = 3.0);

// Same diagnostic with caller-chosen bin edges (strictly increasing, at
// least two, covering every prediction).
CalibrationReport calibration_diagnostic(const FunctionalSpec& spec,
                                         const Eigen::VectorXd& predictions,
                                         const Eigen::VectorXd& y,
                                         const std::vector<double>& edges,
                                         double z_threshold = 3.0);

// Behavioral check that per-threshold elementary fits agree with each other
// and that the pooled fit is calibrated: scans thresholds, measures the
// spread of the per-threshold parameter estimates, and runs the binned
// diagnostic at their coordinatewise median.
struct Theorem1Report {
  std::vector<EtaScanEntry> per_eta;
  // Max over threshold pairs of the l-infinity distance between parameter
  // representatives (interval midpoints when a flat optimum was detected).
  double spread = 0.0;
  ParamVector consensus;
  CalibrationReport calibration;
  // Whether the family supports the shifts the calibration guarantee needs.
  bool applicable = true;
};

Theorem1Report theorem1_harness(const FunctionalSpec& spec,
                                const ModelFamily& family, const Dataset& data,
                                const std::vector<double>& etas,
                                const OptimizerConfig& opt = {});

}  // namespace elicit
