#include "elicit/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elicit {

FunctionalSpec FunctionalSpec::quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidSpec("quantile level must lie strictly inside (0,1)");
  return {FunctionalKind::Quantile, alpha};
}

FunctionalSpec FunctionalSpec::expectile(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidSpec("expectile level must lie strictly inside (0,1)");
  return {FunctionalKind::Expectile, tau};
}

double identification_value(const FunctionalSpec& spec, double z, double y) {
  switch (spec.kind) {
    case FunctionalKind::Mean:
      return z - y;
    case FunctionalKind::SecondMoment:
      return z - y * y;
    case FunctionalKind::Quantile:
      return (y < z ? 1.0 : 0.0) - spec.level;
    case FunctionalKind::Expectile:
      return 2.0 * std::abs(spec.level - (y > z ? 1.0 : 0.0)) * (z - y);
  }
  return 0.0;
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> values,
                                           std::vector<double> probs) {
  if (values.size() != probs.size())
    throw DimensionMismatch("distribution values/probabilities size mismatch");
  if (values.empty()) throw EmptyInput("distribution needs at least one atom");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw NonFiniteValue("non-finite atom value in distribution");
    if (!(probs[i] >= 0.0))
      throw InvalidSpec("atom probabilities must be non-negative");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidSpec("atom probabilities must sum to 1 within 1e-12");

  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t i : order) {
    if (!atoms_.empty() && atoms_.back().value == values[i])
      atoms_.back().prob += probs[i];  // exact duplicates merge
    else
      atoms_.push_back({values[i], probs[i]});
  }
}

double mean_identification(const FunctionalSpec& spec, double z,
                           const DiscreteDistribution& p) {
  double acc = 0.0;
  for (const auto& a : p.atoms()) acc += a.prob * identification_value(spec, z, a.value);
  return acc;
}

namespace {

// Boundary between {pred true} (below) and {pred false} (above) for a
// monotone predicate of z. lo must satisfy pred, hi must not.
double bisect_boundary(const auto& pred, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double snap_to_atom(double z, const DiscreteDistribution& p) {
  for (const auto& a : p.atoms())
    if (std::abs(z - a.value) <= 1e-9) return a.value;
  return z;
}

// Expand [lo, hi] geometrically until pred(lo) && !pred(hi); throws if the
// predicate never flips (identically-zero mean identification on a tail).
std::pair<double, double> expand_bracket(const auto& pred, double lo, double hi) {
  double width = hi - lo;
  for (int it = 0; it < 70 && !pred(lo); ++it) lo -= (width *= 2.0);
  if (!pred(lo)) throw DegenerateInterval("mean identification never becomes negative/positive");
  width = hi - lo;
  for (int it = 0; it < 70 && pred(hi); ++it) hi += (width *= 2.0);
  if (pred(hi)) throw DegenerateInterval("mean identification never becomes negative/positive");
  return {lo, hi};
}

}  // namespace

FunctionalInterval functional_interval(const FunctionalSpec& spec,
                                       const DiscreteDistribution& p) {
  if (spec.kind == FunctionalKind::Mean || spec.kind == FunctionalKind::SecondMoment) {
    double m = 0.0;
    for (const auto& a : p.atoms())
      m += a.prob * (spec.kind == FunctionalKind::Mean ? a.value : a.value * a.value);
    return {m, m};
  }

  double lo0 = p.min_value() - 1.0;
  double hi0 = p.max_value() + 1.0;

  // lower endpoint: boundary of {z : Vbar(z) < 0}
  auto neg = [&](double z) { return mean_identification(spec, z, p) < 0.0; };
  auto [nlo, nhi] = expand_bracket(neg, lo0, hi0);
  double lower = snap_to_atom(bisect_boundary(neg, nlo, nhi), p);

  // upper endpoint: boundary of {z : Vbar(z) <= 0}
  auto nonpos = [&](double z) { return mean_identification(spec, z, p) <= 0.0; };
  auto [plo, phi] = expand_bracket(nonpos, lo0, hi0);
  double upper = snap_to_atom(bisect_boundary(nonpos, plo, phi), p);

  if (lower > upper) lower = upper = 0.5 * (lower + upper);
  return {lower, upper};
}

double elementary_score(const FunctionalSpec& spec, double eta, double z, double y) {
  double ind = (eta <= z ? 1.0 : 0.0) - (eta <= y ? 1.0 : 0.0);
  if (ind == 0.0) return 0.0;
  return ind * identification_value(spec, eta, y);
}

}  // namespace elicit
