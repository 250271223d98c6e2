#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "elicit/functional.hpp"

namespace elicit {

/// Offset used for right limits: evaluation at eta + delta_right(eta).
inline double delta_right(double eta) { return 1e-9 * (1.0 + std::abs(eta)); }

/// Empirical elementary-score curve eta -> (1/n) sum_i S_eta(z_i, y_i).
///
/// Knots are the sorted unique pooled values {z_i} U {y_i} plus `refinement`
/// evenly spaced points per gap. The curve is piecewise linear in eta between
/// consecutive pooled values (constant for Quantile) and identically zero
/// outside [range_lo, range_hi]; value_right captures right limits at jumps.
/// Curves retain their sample vectors so they can be evaluated on foreign
/// knot sets during dominance comparison; `fingerprint` identifies the
/// (functional, observations) pair the curve was built from.
struct MurphyCurve {
  FunctionalSpec spec;
  Eigen::VectorXd knots;
  Eigen::VectorXd value_at;
  Eigen::VectorXd value_right;
  double range_lo = 0.0;
  double range_hi = 0.0;
  std::uint64_t fingerprint = 0;

  struct Samples {
    Eigen::VectorXd z;
    Eigen::VectorXd y;
  };
  std::shared_ptr<const Samples> samples;

  /// Single-point evaluation by direct O(n) summation.
  double evaluate(double eta) const;

  /// Batch evaluation at ascending query points via an O((n+K) log n) sweep;
  /// agrees with evaluate() to within accumulation error.
  Eigen::VectorXd evaluate_sorted(const std::vector<double>& etas) const;
};

MurphyCurve murphy_curve(const FunctionalSpec& spec,
                         const Eigen::VectorXd& predictions,
                         const Eigen::VectorXd& y, int refinement = 1);

/// Identity of (functional, observation vector): curves are comparable only
/// when their fingerprints match.
std::uint64_t sample_fingerprint(const FunctionalSpec& spec, const Eigen::VectorXd& y);

}  // namespace elicit
