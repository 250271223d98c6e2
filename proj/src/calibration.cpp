#include "elicit/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace elicit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SideStats {
  double mean = 0.0;
  double se = 0.0;
};

SideStats side_stats(const FunctionalSpec& spec, double z,
                     const Eigen::VectorXd& y, const std::vector<long>& members) {
  SideStats s;
  double acc = 0.0;
  for (long i : members) acc += identification_value(spec, z, y[i]);
  s.mean = acc / static_cast<double>(members.size());
  if (members.size() > 1) {
    double ss = 0.0;
    for (long i : members) {
      double d = identification_value(spec, z, y[i]) - s.mean;
      ss += d * d;
    }
    double var = ss / static_cast<double>(members.size() - 1);
    s.se = std::sqrt(var / static_cast<double>(members.size()));
  }
  return s;
}

// Violation in standard errors of "value must be <= 0" (dir=+1) or
// "value must be >= 0" (dir=-1).
double violation_score(double mean, double se, int dir) {
  double excess = dir * mean;
  if (excess <= 0.0) return 0.0;
  if (se > 0.0) return excess / se;
  return kInf;
}

CalibrationReport run_bins(const FunctionalSpec& spec,
                           const Eigen::VectorXd& predictions,
                           const Eigen::VectorXd& y,
                           const std::vector<double>& edges,
                           double z_threshold) {
  CalibrationReport rep;
  rep.z_threshold = z_threshold;
  const auto nbins = edges.size() - 1;

  std::vector<std::vector<long>> members(nbins);
  for (Eigen::Index i = 0; i < predictions.size(); ++i) {
    double p = predictions[i];
    auto it = std::upper_bound(edges.begin(), edges.end(), p);
    long b = static_cast<long>(it - edges.begin()) - 1;
    if (b < 0)
      throw OutOfRange("prediction below the first bin edge");
    if (b >= static_cast<long>(nbins)) {
      if (p == edges.back())
        b = static_cast<long>(nbins) - 1;  // last bin is right-closed
      else
        throw OutOfRange("prediction above the last bin edge");
    }
    members[static_cast<std::size_t>(b)].push_back(i);
  }

  for (std::size_t b = 0; b < nbins; ++b) {
    CalibrationBin bin;
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    bin.count = static_cast<long>(members[b].size());
    if (bin.count > 0) {
      bool last = (b + 1 == nbins);
      double right_eta = last ? bin.hi + delta_right(bin.hi) : bin.hi;
      auto left = side_stats(spec, bin.lo, y, members[b]);
      auto right = side_stats(spec, right_eta, y, members[b]);
      bin.mean_v = left.mean;
      bin.mean_v_right = right.mean;
      bin.se_left = left.se;
      bin.se_right = right.se;
      bin.violation = std::max(violation_score(left.mean, left.se, +1),
                               violation_score(right.mean, right.se, -1));
      bin.pass = bin.violation <= z_threshold;
    }
    rep.overall = std::max(rep.overall, bin.violation);
    rep.pass = rep.pass && bin.pass;
    rep.bins.push_back(bin);
  }
  return rep;
}

void check_inputs(const Eigen::VectorXd& predictions, const Eigen::VectorXd& y) {
  if (predictions.size() == 0) throw EmptyInput("no predictions to calibrate");
  if (predictions.size() != y.size())
    throw DimensionMismatch("predictions and observations differ in length");
  for (Eigen::Index i = 0; i < predictions.size(); ++i)
    if (!std::isfinite(predictions[i]) || !std::isfinite(y[i]))
      throw NonFiniteValue("non-finite prediction or observation");
}

CalibrationReport single_point_bin(const FunctionalSpec& spec, double c,
                                   const Eigen::VectorXd& y, double z_threshold) {
  CalibrationReport rep;
  rep.z_threshold = z_threshold;
  std::vector<long> members(static_cast<std::size_t>(y.size()));
  std::iota(members.begin(), members.end(), 0L);
  CalibrationBin bin;
  bin.lo = bin.hi = c;
  bin.count = y.size();
  auto left = side_stats(spec, c, y, members);
  auto right = side_stats(spec, c + delta_right(c), y, members);
  bin.mean_v = left.mean;
  bin.mean_v_right = right.mean;
  bin.se_left = left.se;
  bin.se_right = right.se;
  bin.violation = std::max(violation_score(left.mean, left.se, +1),
                           violation_score(right.mean, right.se, -1));
  bin.pass = bin.violation <= z_threshold;
  rep.bins.push_back(bin);
  rep.overall = bin.violation;
  rep.pass = bin.pass;
  return rep;
}

}  // namespace

CalibrationReport calibration_diagnostic(const FunctionalSpec& spec,
                                         const Eigen::VectorXd& predictions,
                                         const Eigen::VectorXd& y, int bins,
                                         BinningMode mode, double z_threshold) {
  check_inputs(predictions, y);
  if (bins < 1) throw InvalidSpec("bin count must be >= 1");
  if (!(z_threshold > 0.0)) throw InvalidSpec("z threshold must be > 0");

  double lo = predictions.minCoeff(), hi = predictions.maxCoeff();
  if (lo == hi)  // all predictions equal: single two-sided bin at that point
    return single_point_bin(spec, lo, y, z_threshold);

  if (predictions.size() < 5L * bins)
    throw WidthError("need at least 5 observations per bin; use fewer bins");

  std::vector<double> edges;
  if (mode == BinningMode::EqualWidth) {
    edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
      edges[static_cast<std::size_t>(b)] =
          lo + (hi - lo) * static_cast<double>(b) / bins;
    edges.front() = lo;
    edges.back() = hi;
  } else {
    std::vector<double> sorted(predictions.data(),
                               predictions.data() + predictions.size());
    std::sort(sorted.begin(), sorted.end());
    edges.push_back(lo);
    for (int b = 1; b < bins; ++b) {
      std::size_t k = static_cast<std::size_t>(
          (static_cast<long long>(b) * static_cast<long long>(sorted.size())) / bins);
      double e = sorted[k];
      if (e > edges.back() && e < hi) edges.push_back(e);  // ties collapse edges
    }
    edges.push_back(hi);
  }
  return run_bins(spec, predictions, y, edges, z_threshold);
}

CalibrationReport calibration_diagnostic(const FunctionalSpec& spec,
                                         const Eigen::VectorXd& predictions,
                                         const Eigen::VectorXd& y,
                                         const std::vector<double>& edges,
                                         double z_threshold) {
  check_inputs(predictions, y);
  if (!(z_threshold > 0.0)) throw InvalidSpec("z threshold must be > 0");
  if (edges.size() < 2) throw InvalidSpec("need at least two bin edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (!(edges[i] < edges[i + 1]))
      throw InvalidSpec("bin edges must be strictly increasing");
  for (double e : edges)
    if (!std::isfinite(e)) throw NonFiniteValue("non-finite bin edge");
  if (predictions.size() < 5L * static_cast<long>(edges.size() - 1))
    throw WidthError("need at least 5 observations per bin; use fewer bins");
  return run_bins(spec, predictions, y, edges, z_threshold);
}

Theorem1Report theorem1_harness(const FunctionalSpec& spec,
                                const ModelFamily& family, const Dataset& data,
                                const std::vector<double>& etas,
                                const OptimizerConfig& opt) {
  Theorem1Report rep;
  rep.per_eta = eta_scan(spec, family, data, etas, opt);
  rep.applicable = family.supports_shift();

  std::vector<ParamVector> reps;
  for (const auto& e : rep.per_eta) {
    if (!e.ok) continue;
    ParamVector r = e.result.beta;
    if (e.result.minimizer_interval && r.size() == 1)
      r[0] = 0.5 * (e.result.minimizer_interval->first +
                    e.result.minimizer_interval->second);
    reps.push_back(std::move(r));
  }
  if (reps.empty()) {
    for (const auto& e : rep.per_eta)
      if (!e.ok) throw Error("every threshold fit failed; first error: " + e.error);
    throw EmptyInput("eta scan produced no estimates");
  }

  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = i + 1; j < reps.size(); ++j)
      rep.spread =
          std::max(rep.spread, (reps[i] - reps[j]).cwiseAbs().maxCoeff());

  int d = family.param_dim();
  rep.consensus.resize(d);
  for (int k = 0; k < d; ++k) {
    std::vector<double> coords;
    for (const auto& r : reps) coords.push_back(r[k]);
    std::sort(coords.begin(), coords.end());
    std::size_t m = coords.size();
    rep.consensus[k] = (m % 2 == 1) ? coords[m / 2]
                                    : 0.5 * (coords[m / 2 - 1] + coords[m / 2]);
  }

  Eigen::VectorXd preds = predict_all(family, rep.consensus, data);
  rep.calibration = calibration_diagnostic(spec, preds, data.y);
  rep.calibration.applicable = rep.applicable;
  return rep;
}

}  // namespace elicit
