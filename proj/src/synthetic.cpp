#include "elicit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "elicit/errors.hpp"

namespace elicit {

namespace {

double logistic_g(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
}

double curve_value(GeneratorKind g, double x) {
  switch (g) {
    case GeneratorKind::Logistic:
      return logistic_g(x);
    case GeneratorKind::Cubic:
      return x * x * x;
    case GeneratorKind::Quadratic:
      break;
  }
  throw InvalidSpec("zero_count needs the Logistic or Cubic curve");
}

}  // namespace

double GeneratorSpec::effective_noise_sd() const {
  if (kind == GeneratorKind::Quadratic) return 1.0;
  return noise_sd.value_or(0.5);
}

void GeneratorSpec::validate() const {
  if (n < 1) throw InvalidSpec("generator needs n >= 1");
  if (noise_sd && (!std::isfinite(*noise_sd) || *noise_sd < 0.0))
    throw InvalidSpec("noise sd must be finite and >= 0");
}

Dataset generate(const GeneratorSpec& spec) {
  spec.validate();
  std::uint64_t stream =
      splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(spec.kind) + 1));
  std::mt19937_64 rng(stream);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset out;
  out.x.resize(spec.n, 1);
  out.y.resize(spec.n);
  double sd = spec.effective_noise_sd();
  for (long i = 0; i < spec.n; ++i) {
    double x = gauss(rng);
    double eps = gauss(rng);
    out.x(i, 0) = x;
    switch (spec.kind) {
      case GeneratorKind::Quadratic:
        out.y[i] = x * x + eps;
        break;
      case GeneratorKind::Logistic:
        out.y[i] = logistic_g(x) + sd * eps;
        break;
      case GeneratorKind::Cubic:
        out.y[i] = x * x * x + sd * eps;
        break;
    }
  }
  return out;
}

std::vector<double> oracle_b_eta_quadratic(double eta) {
  if (!std::isfinite(eta)) throw NonFiniteValue("eta must be finite");
  if (eta > 0.0) {
    double r = std::sqrt(eta);
    return {-r, r};
  }
  return {0.0};
}

double quadratic_objective_derivative(double b, double eta) {
  if (!std::isfinite(b) || !std::isfinite(eta))
    throw NonFiniteValue("arguments must be finite");
  if (b == 0.0)
    throw ZeroSlope("objective derivative is undefined at b = 0");
  double b2 = b * b;
  double core = eta * eta / (b2 * b2) * normal_pdf(eta / b);
  return (b > 0.0 ? (b2 - eta) : (eta - b2)) * core;
}

std::pair<double, double> oracle_frontier_logistic(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw OutOfRange("logistic frontier needs eta strictly inside (0,1)");
  double logit = std::log(eta / (1.0 - eta));
  return {eta * (1.0 - (1.0 - eta) * logit), eta * (1.0 - eta)};
}

std::pair<double, double> oracle_frontier_cubic(double eta) {
  if (!std::isfinite(eta)) throw NonFiniteValue("eta must be finite");
  return {-2.0 * eta, 3.0 * std::cbrt(eta * eta)};
}

int zero_count(GeneratorKind g, double beta0, double beta1,
               std::pair<double, double> window, int resolution) {
  if (!(beta1 > 0.0)) throw InvalidSpec("zero_count needs beta1 > 0");
  if (!std::isfinite(beta0) || !std::isfinite(window.first) ||
      !std::isfinite(window.second))
    throw NonFiniteValue("window and intercept must be finite");
  if (!(window.first < window.second))
    throw InvalidSpec("window must be a nonempty interval");
  if (resolution < 16)
    throw WindowTooCoarse("resolution below 16 cannot classify roots");

  auto h = [&](double eta) {
    return eta - curve_value(g, (eta - beta0) / beta1);
  };

  const double lo = window.first, hi = window.second;
  const double step = (hi - lo) / (resolution - 1);
  std::vector<double> eta(resolution), hv(resolution);
  for (int i = 0; i < resolution; ++i) {
    eta[i] = (i == resolution - 1) ? hi : lo + i * step;
    hv[i] = h(eta[i]);
  }

  const double xtol = 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  std::vector<double> roots;

  for (int i = 0; i < resolution; ++i)
    if (hv[i] == 0.0) roots.push_back(eta[i]);
  for (int i = 0; i + 1 < resolution; ++i) {
    if (hv[i] == 0.0 || hv[i + 1] == 0.0) continue;
    if ((hv[i] < 0.0) == (hv[i + 1] < 0.0)) continue;
    double a = eta[i], b = eta[i + 1], fa = hv[i];
    while (b - a > xtol) {
      double m = 0.5 * (a + b), fm = h(m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }

  // tangential candidates: interior local minima of |h| with no sign change
  bool coarse = false;
  for (int i = 1; i + 1 < resolution; ++i) {
    double m0 = std::abs(hv[i - 1]), m1 = std::abs(hv[i]), m2 = std::abs(hv[i + 1]);
    if (m1 > m0 || m1 > m2) continue;
    bool same_sign = (hv[i - 1] < 0.0) == (hv[i] < 0.0) &&
                     (hv[i] < 0.0) == (hv[i + 1] < 0.0);
    if (!same_sign || hv[i] == 0.0) continue;
    // golden-section minimization of |h| over the bracketing cells
    double a = eta[i - 1], b = eta[i + 1];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = std::abs(h(x1)), f2 = std::abs(h(x2));
    while (b - a > xtol) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = std::abs(h(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = std::abs(h(x2));
      }
    }
    double at = 0.5 * (a + b);
    double depth = std::abs(h(at));
    if (depth < 1e-8)
      roots.push_back(at);
    else if (depth <= 1e-7)
      coarse = true;  // too close to call a tangency at this resolution
  }
  if (coarse)
    throw WindowTooCoarse(
        "near-tangency detected; increase the resolution or shrink the window");

  std::sort(roots.begin(), roots.end());
  int count = 0;
  double last = -std::numeric_limits<double>::infinity();
  for (double r : roots) {
    if (r - last > 0.5 * step) ++count;
    last = r;
  }
  return count;
}

}  // namespace elicit
