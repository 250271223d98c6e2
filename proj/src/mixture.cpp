#include "elicit/mixture.hpp"

#include <algorithm>
#include <cmath>

namespace elicit {

MixtureMeasure MixtureMeasure::lebesgue(double lo, double hi, double density) {
  MixtureMeasure h;
  h.segments.push_back({lo, hi, density});
  h.validate();
  return h;
}

void MixtureMeasure::validate() const {
  for (const auto& a : atoms) {
    if (!std::isfinite(a.eta) || !std::isfinite(a.weight))
      throw NonFiniteValue("mixture atom must be finite");
    if (a.weight < 0.0) throw InvalidSpec("mixture atom weight must be >= 0");
  }
  std::vector<std::pair<double, double>> spans;
  for (const auto& s : segments) {
    if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || !std::isfinite(s.density))
      throw NonFiniteValue("mixture segment must be finite");
    if (!(s.lo < s.hi)) throw InvalidSpec("mixture segment needs lo < hi");
    if (s.density < 0.0) throw InvalidSpec("mixture segment density must be >= 0");
    spans.emplace_back(s.lo, s.hi);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i].first < spans[i - 1].second)
      throw InvalidSpec("mixture segment interiors overlap");
}

namespace {

// Adaptive Simpson on [a,b]; fa/fm/fb are f at a, midpoint, b.
double simpson_rec(const auto& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const auto& f, double a, double b, double tol) {
  if (!(a < b)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// integral over [a,b] of V(eta, y) deta, exact for Mean/Quantile; quadrature
// split at the integrand kink eta = y for the remaining kinds.
double integral_of_v(const FunctionalSpec& spec, double a, double b, double y) {
  if (!(a < b)) return 0.0;
  switch (spec.kind) {
    case FunctionalKind::Mean:
      return (b - a) * (0.5 * (a + b) - y);
    case FunctionalKind::Quantile: {
      double above = std::max(0.0, b - std::max(a, y));   // where 1{y < eta} = 1
      double below = (b - a) - above;
      return (1.0 - spec.level) * above - spec.level * below;
    }
    default: {
      auto f = [&](double eta) { return identification_value(spec, eta, y); };
      double tol = 1e-10 * (1.0 + std::abs(b - a));
      if (y > a && y < b)
        return adaptive_simpson(f, a, y, 0.5 * tol) + adaptive_simpson(f, y, b, 0.5 * tol);
      return adaptive_simpson(f, a, b, tol);
    }
  }
}

}  // namespace

double mixture_loss(const FunctionalSpec& spec, const MixtureMeasure& h,
                    double z, double y) {
  double acc = 0.0;
  for (const auto& a : h.atoms)
    if (a.weight != 0.0) acc += a.weight * elementary_score(spec, a.eta, z, y);
  if (z == y) return acc;
  double lo = std::min(z, y), hi = std::max(z, y);
  double sign = z > y ? 1.0 : -1.0;
  for (const auto& s : h.segments) {
    if (s.density == 0.0) continue;
    double a = std::max(s.lo, lo), b = std::min(s.hi, hi);
    acc += s.density * sign * integral_of_v(spec, a, b, y);
  }
  return acc;
}

BregmanGenerator BregmanGenerator::square() { return {}; }

BregmanGenerator BregmanGenerator::quartic() {
  BregmanGenerator g;
  g.kind_ = Kind::Quartic;
  return g;
}

BregmanGenerator BregmanGenerator::tabulated(std::vector<double> t,
                                             std::vector<double> phi) {
  if (t.size() != phi.size()) throw DimensionMismatch("tabulation sizes differ");
  if (t.size() < 2) throw InvalidSpec("tabulation needs at least two points");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(phi[i]))
      throw NonFiniteValue("tabulation must be finite");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw InvalidSpec("tabulation grid must be strictly increasing");
  }
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    double sl = (phi[i] - phi[i - 1]) / (t[i] - t[i - 1]);
    double sr = (phi[i + 1] - phi[i]) / (t[i + 1] - t[i]);
    if (sr - sl < -1e-10) throw NonConvex("tabulated generator is not convex");
  }
  BregmanGenerator g;
  g.kind_ = Kind::Tabulated;
  g.grid_ = std::move(t);
  g.values_ = std::move(phi);
  return g;
}

double BregmanGenerator::value(double t) const {
  switch (kind_) {
    case Kind::Square:
      return t * t;
    case Kind::Quartic:
      return t * t * t * t;
    case Kind::Tabulated: {
      if (t < grid_.front() || t > grid_.back())
        throw OutOfRange("evaluation point outside tabulated range");
      auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
      std::size_t i = std::min<std::size_t>(grid_.size() - 1,
                                            std::max<std::ptrdiff_t>(1, it - grid_.begin()));
      double w = (t - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
      return values_[i - 1] + w * (values_[i] - values_[i - 1]);
    }
  }
  return 0.0;
}

double BregmanGenerator::left_slope(double t) const {
  switch (kind_) {
    case Kind::Square:
      return 2.0 * t;
    case Kind::Quartic:
      return 4.0 * t * t * t;
    case Kind::Tabulated: {
      if (t < grid_.front() || t > grid_.back())
        throw OutOfRange("evaluation point outside tabulated range");
      // cell whose closure contains t from the left; first cell at the left edge
      auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
      std::size_t i = it - grid_.begin();
      if (i == 0 || (i < grid_.size() && grid_[i] != t)) {
        it = std::upper_bound(grid_.begin(), grid_.end(), t);
        i = it - grid_.begin();
      }
      i = std::min(std::max<std::size_t>(i, 1), grid_.size() - 1);
      return (values_[i] - values_[i - 1]) / (grid_[i] - grid_[i - 1]);
    }
  }
  return 0.0;
}

double bregman_loss(const BregmanGenerator& phi, double z, double y) {
  return phi.value(y) - phi.value(z) - phi.left_slope(z) * (y - z);
}

MixtureMeasure mixture_from_generator(const BregmanGenerator& phi,
                                      std::pair<double, double> window,
                                      int resolution) {
  auto [lo, hi] = window;
  if (!(lo < hi)) throw InvalidSpec("generator window needs lo < hi");
  if (resolution < 2) throw InvalidSpec("generator resolution must be >= 2");
  double h = (hi - lo) / resolution;

  // Node-centred second differences; each interior node owns the cell
  // [t_j - h/2, t_j + h/2), edge half-cells reuse the nearest interior value.
  std::vector<double> dens(resolution + 1, 0.0);
  for (int j = 1; j < resolution; ++j) {
    double t = lo + j * h;
    double d2 = phi.value(t + h) - 2.0 * phi.value(t) + phi.value(t - h);
    if (d2 < -1e-10) throw NonConvex("generator second difference below -1e-10");
    dens[j] = std::max(0.0, d2 / (h * h));
  }
  dens[0] = dens[1];
  dens[resolution] = dens[resolution - 1];

  MixtureMeasure out;
  double prev = lo;
  for (int j = 0; j <= resolution; ++j) {
    double right = (j == resolution) ? hi : lo + (j + 0.5) * h;
    if (right > prev && dens[j] > 0.0) out.segments.push_back({prev, right, dens[j]});
    prev = right;
  }
  out.validate();
  return out;
}

}  // namespace elicit
