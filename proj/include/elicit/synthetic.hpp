#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "elicit/data.hpp"

namespace elicit {

// The three built-in data-generating processes:
//   Quadratic  Y = X^2 + eps            (noise sd fixed at 1)
//   Logistic   Y = e^X/(1+e^X) + sd*eps (default sd 0.5)
//   Cubic      Y = X^3 + sd*eps         (default sd 0.5)
// with X and eps independent standard normal.
enum class GeneratorKind { Quadratic, Logistic, Cubic };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Quadratic;
  long n = 0;
  std::uint64_t seed = 0;
  // Noise standard deviation; leave unset for the per-kind default. The
  // Quadratic process always uses 1.
  std::optional<double> noise_sd;

  double effective_noise_sd() const;
  void validate() const;
};

// Deterministic per (kind, seed) within a build: one named stream drives
// interleaved X and eps draws.
Dataset generate(const GeneratorSpec& spec);

// Minimizer set of the per-threshold elementary risk for the Quadratic
// process under the through-the-origin line model: {-sqrt(eta), sqrt(eta)}
// for eta > 0, {0} otherwise. Sorted ascending.
std::vector<double> oracle_b_eta_quadratic(double eta);

// Closed-form derivative in b of that elementary risk. Throws ZeroSlope at
// b = 0 (the objective is not differentiable there).
double quadratic_objective_derivative(double b, double eta);

// Tangent line to the logistic curve at the point where it equals eta:
// (beta0, beta1) with beta0 + beta1*x = eta and beta1 = slope at that x.
// Requires eta in (0,1) (OutOfRange otherwise).
std::pair<double, double> oracle_frontier_logistic(double eta);

// Tangent line to the cubic curve at x = eta^(1/3): beta0 = -2*eta,
// beta1 = 3*(eta^2)^(1/3). eta = 0 degenerates to (0, 0).
std::pair<double, double> oracle_frontier_cubic(double eta);

// Number of solutions of eta = g((eta - beta0)/beta1) inside the window,
// found by a sign-change scan on a `resolution`-point grid with bisection
// refinement; tangential (non-crossing) roots are detected as local minima
// of |h| that refine below 1e-8 and are counted once. Throws
// WindowTooCoarse when the grid is too coarse to classify (resolution < 16,
// or a near-tangency bottoms out between 1e-8 and 1e-7). The Quadratic kind
// is not a curve here and is rejected.
int zero_count(GeneratorKind g, double beta0, double beta1,
               std::pair<double, double> window, int resolution = 1024);

}  // namespace elicit
