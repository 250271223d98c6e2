#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "elicit/data.hpp"
#include "elicit/mixture.hpp"
#include "elicit/model.hpp"

namespace elicit {

struct OptimizerConfig {
  int starts = 9;          // total multistart budget (lattice of floor(starts^(1/d)) per axis)
  double xtol = 1e-6;      // simplex diameter / bracket width termination
  double ftol_flag = 1e-4; // relative disagreement of the two best starts that clears `converged`
  int grid = 401;          // 1-D scan resolution (also used for interval detection)
  int max_iter = 400;      // per simplex run
  // Optional per-parameter numeric search box; defaults to a data-scale box
  // intersected with the family's declared bounds.
  std::optional<std::vector<std::pair<double, double>>> search_box;
};

struct FitResult {
  ParamVector beta;
  double objective = 0.0;
  long evaluations = 0;
  bool converged = true;
  // Present for one-parameter fits whose optimum is an interval rather than
  // a point (flat objective), refined to the plateau edges.
  std::optional<std::pair<double, double>> minimizer_interval;
};

/// (1/n) sum_i L_H(m(x_i; beta), y_i).
double empirical_risk(const FunctionalSpec& spec, const MixtureMeasure& h,
                      const ModelFamily& family, const ParamVector& beta,
                      const Dataset& data);

/// (1/n) sum_i S_eta(m(x_i; beta), y_i).
double elementary_risk(const FunctionalSpec& spec, double eta,
                       const ModelFamily& family, const ParamVector& beta,
                       const Dataset& data);

/// All model predictions as a vector (one gemv for the linear families).
Eigen::VectorXd predict_all(const ModelFamily& family, const ParamVector& beta,
                            const Dataset& data);

/// Minimizes empirical_risk over the family's domain by multistart
/// derivative-free simplex descent from a coarse lattice of opt.starts
/// points. `converged` is cleared when the two best starts disagree by more
/// than opt.ftol_flag relative. One-parameter fits detect flat optima by a
/// grid scan and report minimizer_interval.
FitResult fit(const FunctionalSpec& spec, const MixtureMeasure& h,
              const ModelFamily& family, const Dataset& data,
              const OptimizerConfig& opt = {});

/// Same contract with the elementary objective at a fixed eta. The objective
/// is piecewise constant in beta; one-parameter families are solved exactly
/// by an event sweep over the per-sample inclusion breakpoints, and
/// single-covariate affine families by an exact scan over threshold cells
/// (the objective depends on beta only through the decision threshold).
/// Since elementary optima are typically flat sets, the returned point is
/// canonicalized: affine fits report the tangent of the level-to-threshold
/// frontier through the optimal pivot whenever its exact risk is
/// statistically tied with the scan minimum (within opt.ftol_flag relative
/// plus one standard error), falling back to the minimum
/// mean-squared-prediction-error element of the optimal cell; the reported
/// objective is the exact elementary risk at the returned point.
/// One-parameter fits report minimizer_interval exactly when the optimal
/// plateau is bounded by two interior breakpoints (never a search-box edge).
FitResult fit_elementary(const FunctionalSpec& spec, double eta,
                         const ModelFamily& family, const Dataset& data,
                         const OptimizerConfig& opt = {});

}  // namespace elicit
