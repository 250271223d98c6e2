#include "elicit/model.hpp"

#include <cmath>

namespace elicit {

ModelFamily ModelFamily::constant() { return {ModelKind::Constant, 1, {}}; }

ModelFamily ModelFamily::linear_no_intercept(int dim) {
  if (dim < 1) throw InvalidSpec("linear family needs dim >= 1");
  return {ModelKind::LinearNoIntercept, dim, {}};
}

ModelFamily ModelFamily::linear_with_intercept(int dim) {
  if (dim < 1) throw InvalidSpec("linear family needs dim >= 1");
  return {ModelKind::LinearWithIntercept, dim, {}};
}

int ModelFamily::param_dim() const {
  switch (kind) {
    case ModelKind::Constant:
      return 1;
    case ModelKind::LinearNoIntercept:
      return dim;
    case ModelKind::LinearWithIntercept:
      return dim + 1;
  }
  return 0;
}

void ModelFamily::validate() const {
  if (kind != ModelKind::Constant && dim < 1)
    throw InvalidSpec("linear family needs dim >= 1");
  if (!bounds.empty() && static_cast<int>(bounds.size()) != param_dim())
    throw DimensionMismatch("one bound pair per parameter required");
  for (const auto& b : bounds)
    if (!(b.lo < b.hi)) throw InvalidSpec("bound needs lo < hi");
}

bool ModelFamily::in_domain(const ParamVector& beta) const {
  if (beta.size() != param_dim()) return false;
  for (std::size_t i = 0; i < bounds.size(); ++i)
    if (!(beta[static_cast<int>(i)] > bounds[i].lo &&
          beta[static_cast<int>(i)] < bounds[i].hi))
      return false;
  return true;
}

bool ModelFamily::supports_shift() const {
  if (kind == ModelKind::LinearNoIntercept) return false;
  if (bounds.empty()) return true;
  const Bound& b0 = bounds.front();  // intercept coordinate
  return std::isinf(b0.lo) && std::isinf(b0.hi);
}

double predict(const ModelFamily& family, const ParamVector& beta,
               const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (beta.size() != family.param_dim())
    throw DimensionMismatch("parameter vector has wrong size");
  switch (family.kind) {
    case ModelKind::Constant:
      return beta[0];
    case ModelKind::LinearNoIntercept:
      if (x.size() != family.dim) throw DimensionMismatch("covariate has wrong size");
      return beta.dot(x);
    case ModelKind::LinearWithIntercept:
      if (x.size() != family.dim) throw DimensionMismatch("covariate has wrong size");
      return beta[0] + beta.tail(family.dim).dot(x);
  }
  return 0.0;
}

std::optional<ParamVector> shift(const ModelFamily& family,
                                 const ParamVector& beta, double a) {
  if (beta.size() != family.param_dim())
    throw DimensionMismatch("parameter vector has wrong size");
  if (family.kind == ModelKind::LinearNoIntercept) return std::nullopt;
  ParamVector shifted = beta;
  shifted[0] += a;
  if (!family.in_domain(shifted)) return std::nullopt;
  return shifted;
}

}  // namespace elicit
