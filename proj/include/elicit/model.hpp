#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <vector>

#include "elicit/errors.hpp"

namespace elicit {

using ParamVector = Eigen::VectorXd;

enum class ModelKind { Constant, LinearNoIntercept, LinearWithIntercept };

/// Parametric prediction family over a box parameter domain. Bounds are open
/// per coordinate ((-inf, inf) by default); parameter order for
/// LinearWithIntercept is (intercept, slopes...).
struct ModelFamily {
  ModelKind kind = ModelKind::Constant;
  int dim = 1;  // covariate dimension; ignored for Constant

  struct Bound {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
  };
  std::vector<Bound> bounds;  // empty = unbounded; else one per parameter

  static ModelFamily constant();
  static ModelFamily linear_no_intercept(int dim);
  static ModelFamily linear_with_intercept(int dim);

  int param_dim() const;
  bool in_domain(const ParamVector& beta) const;  // strict interior
  void validate() const;

  /// True when every parameter admits the additive shift of the prediction
  /// required by the shift map: an intercept coordinate unbounded on both
  /// sides. Constant family's single coordinate acts as the intercept.
  bool supports_shift() const;
};

/// m(x; beta). x must have the family's covariate dimension (ignored for
/// Constant); DimensionMismatch otherwise.
double predict(const ModelFamily& family, const ParamVector& beta,
               const Eigen::Ref<const Eigen::VectorXd>& x);

/// Parameters realizing x -> m(x; beta) + a within the family, or nullopt
/// when the family cannot absorb an additive shift (no intercept, or the
/// shifted parameter leaves the open domain).
std::optional<ParamVector> shift(const ModelFamily& family,
                                 const ParamVector& beta, double a);

}  // namespace elicit
