#pragma once

#include <cstdint>
#include <vector>

#include "elicit/errors.hpp"

namespace elicit {

enum class FunctionalKind { Mean, Quantile, Expectile, SecondMoment };

/// An identifiable one-dimensional statistical functional, described by its
/// identification function V(z, y). V is non-decreasing and left-continuous
/// in the prediction argument z. Quantile and Expectile carry a level in the
/// open unit interval.
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::Mean;
  double level = 0.5;  // quantile alpha / expectile tau; ignored otherwise

  static FunctionalSpec mean() { return {FunctionalKind::Mean, 0.5}; }
  static FunctionalSpec second_moment() { return {FunctionalKind::SecondMoment, 0.5}; }
  static FunctionalSpec quantile(double alpha);
  static FunctionalSpec expectile(double tau);
};

/// V(z, y). Argument order is (prediction, observation) everywhere in this
/// library. Quantile uses the strict indicator 1{y < z}; Expectile is
/// normalized as 2|tau - 1{y > z}|(z - y).
double identification_value(const FunctionalSpec& spec, double z, double y);

/// Finitely supported probability distribution. Atoms are sorted by value and
/// exact duplicates merged at construction. Probabilities must be >= 0, sum
/// to 1 within 1e-12, and all values must be finite.
class DiscreteDistribution {
 public:
  struct Atom {
    double value;
    double prob;
  };

  DiscreteDistribution(std::vector<double> values, std::vector<double> probs);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double min_value() const { return atoms_.front().value; }
  double max_value() const { return atoms_.back().value; }

 private:
  std::vector<Atom> atoms_;
};

/// Mean identification function z -> integral of V(z, .) against P.
double mean_identification(const FunctionalSpec& spec, double z,
                           const DiscreteDistribution& p);

/// Closed interval of functional values, [lower, upper] with lower <= upper.
struct FunctionalInterval {
  double lower;
  double upper;
  bool contains(double t, double tol = 0.0) const {
    return t >= lower - tol && t <= upper + tol;
  }
};

/// T(P) = [sup{z : Vbar(z,P) < 0}, inf{z : Vbar(z,P) > 0}]. Exact for Mean
/// (E Y) and SecondMoment (E Y^2); Quantile and Expectile endpoints resolved
/// by bracketed bisection to absolute tolerance 1e-10, brackets starting at
/// [min atom - 1, max atom + 1] and expanding geometrically. Endpoints within
/// 1e-9 of an atom value snap to it.
FunctionalInterval functional_interval(const FunctionalSpec& spec,
                                       const DiscreteDistribution& p);

/// Elementary score S_eta(z, y) = (1{eta <= z} - 1{eta <= y}) V(eta, y).
/// Non-negative pointwise for Mean/Quantile/Expectile; can be negative for
/// SecondMoment. Vanishes unless eta lies in (min(z,y), max(z,y)].
double elementary_score(const FunctionalSpec& spec, double eta, double z, double y);

}  // namespace elicit
