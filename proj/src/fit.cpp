#include "elicit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

namespace elicit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// dV/dz where it exists: positive for mean-like functionals and expectiles,
// identically zero for quantiles (V is a step in z there).
double identification_slope(const FunctionalSpec& spec, double z, double y) {
  switch (spec.kind) {
    case FunctionalKind::Mean:
    case FunctionalKind::SecondMoment:
      return 1.0;
    case FunctionalKind::Expectile:
      return 2.0 * std::abs(spec.level - (y > z ? 1.0 : 0.0));
    case FunctionalKind::Quantile:
      return 0.0;
  }
  return 0.0;
}

using Box = std::vector<std::pair<double, double>>;

Box resolve_box(const ModelFamily& family, const Dataset& data,
                const OptimizerConfig& opt) {
  int d = family.param_dim();
  double scale = std::max({1.0, data.y.cwiseAbs().maxCoeff(),
                           data.x.size() > 0 ? data.x.cwiseAbs().maxCoeff() : 0.0});
  double r = 3.0 * scale;
  Box box(d, {-r, r});
  if (opt.search_box) {
    if (static_cast<int>(opt.search_box->size()) != d)
      throw DimensionMismatch("search box must have one range per parameter");
    box = *opt.search_box;
  }
  for (int j = 0; j < d; ++j) {
    if (!family.bounds.empty()) {
      const auto& b = family.bounds[static_cast<std::size_t>(j)];
      double inset_lo = std::isinf(b.lo) ? 0.0 : 1e-9 * (1.0 + std::abs(b.lo));
      double inset_hi = std::isinf(b.hi) ? 0.0 : 1e-9 * (1.0 + std::abs(b.hi));
      box[j].first = std::max(box[j].first, b.lo + inset_lo);
      box[j].second = std::min(box[j].second, b.hi - inset_hi);
    }
    if (!(box[j].first < box[j].second))
      throw NoFeasibleStart("empty search box for parameter " + std::to_string(j));
  }
  return box;
}

ParamVector clamp_to_box(ParamVector beta, const Box& box) {
  for (int j = 0; j < beta.size(); ++j)
    beta[j] = std::min(std::max(beta[j], box[j].first), box[j].second);
  return beta;
}

struct SimplexResult {
  ParamVector x;
  double f;
};

// Nelder-Mead with box projection. Terminates on simplex diameter < xtol,
// on a persistently flat simplex (plateau objectives), or on max_iter.
SimplexResult nelder_mead(const std::function<double(const ParamVector&)>& f,
                          ParamVector start, const Box& box, double xtol,
                          int max_iter, double edge_scale) {
  const int d = static_cast<int>(start.size());
  std::vector<ParamVector> v(d + 1);
  std::vector<double> fv(d + 1);
  v[0] = clamp_to_box(std::move(start), box);
  for (int j = 0; j < d; ++j) {
    ParamVector p = v[0];
    double h = edge_scale * (box[j].second - box[j].first);
    p[j] = (p[j] + h <= box[j].second) ? p[j] + h : p[j] - h;
    v[j + 1] = clamp_to_box(std::move(p), box);
  }
  for (int k = 0; k <= d; ++k) fv[k] = f(v[k]);

  int flat_rounds = 0;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> ord(d + 1);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    int best = ord[0], worst = ord[d], second = ord[d - 1];

    double diam = 0.0;
    for (int k = 0; k <= d; ++k) diam = std::max(diam, (v[k] - v[best]).cwiseAbs().maxCoeff());
    if (diam < xtol) break;
    if (fv[worst] - fv[best] <= 1e-15 * (1.0 + std::abs(fv[best]))) {
      if (++flat_rounds >= 3) break;
    } else {
      flat_rounds = 0;
    }

    ParamVector centroid = ParamVector::Zero(d);
    for (int k = 0; k <= d; ++k)
      if (k != worst) centroid += v[k];
    centroid /= d;

    ParamVector xr = clamp_to_box(centroid + (centroid - v[worst]), box);
    double fr = f(xr);
    if (fr < fv[best]) {
      ParamVector xe = clamp_to_box(centroid + 2.0 * (centroid - v[worst]), box);
      double fe = f(xe);
      if (fe < fr) {
        v[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        v[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    ParamVector xc = clamp_to_box(centroid + 0.5 * (v[worst] - centroid), box);
    double fc = f(xc);
    if (fc < std::min(fr, fv[worst])) {
      v[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    for (int k = 0; k <= d; ++k) {  // shrink toward best
      if (k == best) continue;
      v[k] = clamp_to_box(v[best] + 0.5 * (v[k] - v[best]), box);
      fv[k] = f(v[k]);
    }
  }
  int best = 0;
  for (int k = 1; k <= d; ++k)
    if (fv[k] < fv[best]) best = k;
  return {v[best], fv[best]};
}

std::vector<ParamVector> lattice_starts(const Box& box, int budget) {
  const int d = static_cast<int>(box.size());
  int k = std::max(1, static_cast<int>(std::floor(std::pow(budget, 1.0 / d))));
  std::vector<ParamVector> pts;
  std::vector<int> idx(d, 0);
  for (;;) {
    ParamVector p(d);
    for (int j = 0; j < d; ++j) {
      double w = box[j].second - box[j].first;
      p[j] = box[j].first + w * (idx[j] + 0.5) / k;
    }
    pts.push_back(std::move(p));
    int j = 0;
    while (j < d && ++idx[j] == k) idx[j++] = 0;
    if (j == d) break;
  }
  return pts;
}

struct Multistart {
  SimplexResult best;
  bool converged;
};

Multistart multistart_minimize(const std::function<double(const ParamVector&)>& f,
                               const Box& box, const OptimizerConfig& opt) {
  auto starts = lattice_starts(box, opt.starts);
  std::vector<SimplexResult> results;
  results.reserve(starts.size());
  for (auto& s : starts)
    results.push_back(nelder_mead(f, std::move(s), box, opt.xtol, opt.max_iter,
                                  0.5 / std::max<std::size_t>(1, starts.size())));
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].f < results[best].f) best = i;

  bool converged = true;
  if (results.size() > 1) {
    std::vector<double> fs;
    for (const auto& r : results) fs.push_back(r.f);
    std::sort(fs.begin(), fs.end());
    converged = (fs[1] - fs[0]) <= opt.ftol_flag * (1.0 + std::abs(fs[0]));
  }
  return {results[best], converged};
}

double mse_of(const ModelFamily& family, const ParamVector& beta, const Dataset& data) {
  return (predict_all(family, beta, data) - data.y).squaredNorm() /
         static_cast<double>(data.n());
}

// Plateau of J <= f* + tol around beta_hat on a 1-D grid, edges refined by
// bisection. Returns nullopt when the plateau is no wider than one cell.
std::optional<std::pair<double, double>> detect_interval(
    const std::function<double(double)>& j1, const std::pair<double, double>& range,
    int grid, double fstar, double beta_hat) {
  double lo = range.first, hi = range.second;
  double step = (hi - lo) / (grid - 1);
  double tol = std::max(1e-13, 1e-9 * (1.0 + std::abs(fstar)));
  auto flat = [&](double b) { return j1(b) <= fstar + tol; };

  long hit = std::lround((beta_hat - lo) / step);
  hit = std::max(0L, std::min<long>(grid - 1, hit));
  if (!flat(lo + hit * step)) {
    // grid node nearest the optimum may sit just off the plateau
    if (hit > 0 && flat(lo + (hit - 1) * step))
      --hit;
    else if (hit + 1 < grid && flat(lo + (hit + 1) * step))
      ++hit;
    else
      return std::nullopt;
  }
  long l = hit, r = hit;
  while (l > 0 && flat(lo + (l - 1) * step)) --l;
  while (r + 1 < grid && flat(lo + (r + 1) * step)) ++r;

  auto refine = [&](double inside, double outside) {
    for (int it = 0; it < 80 && std::abs(outside - inside) > 1e-10; ++it) {
      double mid = 0.5 * (inside + outside);
      (flat(mid) ? inside : outside) = mid;
    }
    return inside;
  };
  double left = (l == 0) ? lo : refine(lo + l * step, lo + (l - 1) * step);
  double right = (r == grid - 1) ? hi : refine(lo + r * step, lo + (r + 1) * step);
  if (right - left <= 1.5 * step) return std::nullopt;
  return std::make_pair(left, right);
}

}  // namespace

Eigen::VectorXd predict_all(const ModelFamily& family, const ParamVector& beta,
                            const Dataset& data) {
  if (beta.size() != family.param_dim())
    throw DimensionMismatch("parameter vector has wrong size");
  switch (family.kind) {
    case ModelKind::Constant:
      return Eigen::VectorXd::Constant(data.n(), beta[0]);
    case ModelKind::LinearNoIntercept:
      if (data.dim() != family.dim) throw DimensionMismatch("dataset dimension mismatch");
      return data.x * beta;
    case ModelKind::LinearWithIntercept:
      if (data.dim() != family.dim) throw DimensionMismatch("dataset dimension mismatch");
      return (data.x * beta.tail(family.dim)).array() + beta[0];
  }
  return {};
}

double empirical_risk(const FunctionalSpec& spec, const MixtureMeasure& h,
                      const ModelFamily& family, const ParamVector& beta,
                      const Dataset& data) {
  Eigen::VectorXd z = predict_all(family, beta, data);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    acc += mixture_loss(spec, h, z[i], data.y[i]);
  return acc / static_cast<double>(data.n());
}

double elementary_risk(const FunctionalSpec& spec, double eta,
                       const ModelFamily& family, const ParamVector& beta,
                       const Dataset& data) {
  Eigen::VectorXd z = predict_all(family, beta, data);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    acc += elementary_score(spec, eta, z[i], data.y[i]);
  return acc / static_cast<double>(data.n());
}

FitResult fit(const FunctionalSpec& spec, const MixtureMeasure& h,
              const ModelFamily& family, const Dataset& data,
              const OptimizerConfig& opt) {
  family.validate();
  data.validate();
  h.validate();
  Box box = resolve_box(family, data, opt);

  long evals = 0;
  auto objective = [&](const ParamVector& beta) {
    ++evals;
    return empirical_risk(spec, h, family, beta, data);
  };

  auto ms = multistart_minimize(objective, box, opt);
  FitResult out;
  out.beta = ms.best.x;
  out.converged = ms.converged;
  out.objective = objective(out.beta);

  if (family.param_dim() == 1 && opt.grid >= 8) {
    auto j1 = [&](double b) {
      ParamVector p(1);
      p[0] = b;
      return objective(p);
    };
    out.minimizer_interval =
        detect_interval(j1, box[0], opt.grid, out.objective, out.beta[0]);
  }
  out.evaluations = evals;
  return out;
}

namespace {

// ---- elementary objective machinery ----

struct ElementaryObjective {
  // J(beta) = (1/n) sum_{i: z_i(beta) >= eta} v_i + constant, with
  // v_i = V(eta, y_i); only the inclusion set depends on beta.
  Eigen::VectorXd v;
  double constant = 0.0;
  double inv_n = 0.0;

  static ElementaryObjective make(const FunctionalSpec& spec, double eta,
                                  const Dataset& data) {
    ElementaryObjective e;
    const auto n = data.n();
    e.v.resize(n);
    double bsum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      e.v[i] = identification_value(spec, eta, data.y[i]);
      if (eta <= data.y[i]) bsum += e.v[i];
    }
    e.inv_n = 1.0 / static_cast<double>(n);
    e.constant = -bsum * e.inv_n;
    return e;
  }

  double at(const Eigen::VectorXd& z, double eta) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (eta <= z[i]) acc += v[i];
    return acc * inv_n + constant;
  }
};

// Exact threshold-cell scan for single-covariate affine models. The
// objective depends on (beta0, beta1) only through the half-space of
// included samples, so the global minimum over each slope-sign branch is the
// minimum over n+1 suffix/prefix sums. The returned point is the tangent of
// the level-to-threshold frontier through the optimal pivot whenever the
// data support estimating it (see tangent_fit below); otherwise it is the
// constrained least-squares element of the optimal cell (line pinned to pass
// through (theta, eta) with theta in the optimal threshold cell).
FitResult fit_elementary_affine1(const FunctionalSpec& spec, double eta,
                                 const ModelFamily& family, const Dataset& data,
                                 const OptimizerConfig& opt, long& evals) {
  const auto n = data.n();
  auto eo = ElementaryObjective::make(spec, eta, data);

  std::vector<double> xs(data.x.col(0).data(), data.x.col(0).data() + n);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> xs_sorted(xs.size()), v_sorted(xs.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    xs_sorted[k] = xs[order[k]];
    v_sorted[k] = eo.v[static_cast<Eigen::Index>(order[k])];
  }

  // suffix[k] = sum of v over ranks >= k; prefix[k] = sum over ranks < k
  std::vector<double> suffix(xs.size() + 1, 0.0), prefix(xs.size() + 1, 0.0);
  {
    long double acc = 0.0L;
    for (std::size_t k = xs.size(); k > 0; --k) {
      acc += v_sorted[k - 1];
      suffix[k - 1] = static_cast<double>(acc);
    }
    acc = 0.0L;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      acc += v_sorted[k];
      prefix[k + 1] = static_cast<double>(acc);
    }
  }
  evals += 2 * static_cast<long>(n);

  struct Cell {
    int branch;  // +1: include {x >= theta}; -1: include {x <= theta}
    std::size_t k;
    double objective;
  };
  double fstar = kInf;
  std::vector<Cell> cells;
  auto consider = [&](int branch, std::size_t k, double obj) {
    if (obj < fstar - 1e-300) fstar = std::min(fstar, obj);
    cells.push_back({branch, k, obj});
  };
  for (std::size_t k = 0; k <= xs.size(); ++k) {
    if (k > 0 && k < xs.size() && xs_sorted[k - 1] == xs_sorted[k]) continue;
    consider(+1, k, suffix[k] * eo.inv_n + eo.constant);
    consider(-1, k, prefix[k] * eo.inv_n + eo.constant);
  }
  double tie_tol = std::max(1e-14, 1e-10 * (1.0 + std::abs(fstar)));

  const double span = std::max(1.0, xs_sorted.back() - xs_sorted.front());
  const double y_mean_eta = eta;  // line is pinned to pass through (theta, eta)

  double best_mse = kInf;
  ParamVector best_beta;
  double slope_lo = -kInf, slope_hi = kInf;
  if (!family.bounds.empty()) {
    slope_lo = family.bounds[1].lo;
    slope_hi = family.bounds[1].hi;
  }
  if (opt.search_box) {
    slope_lo = std::max(slope_lo, (*opt.search_box)[1].first);
    slope_hi = std::min(slope_hi, (*opt.search_box)[1].second);
  }
  auto clamp_slope = [&](double s) {
    double lo = std::isinf(slope_lo) ? -kInf : slope_lo + 1e-9 * (1.0 + std::abs(slope_lo));
    double hi = std::isinf(slope_hi) ? kInf : slope_hi - 1e-9 * (1.0 + std::abs(slope_hi));
    return std::min(std::max(s, lo), hi);
  };

  // Robust x spread, used as the bandwidth scale of the local fit below.
  double x_scale = 0.0;
  {
    double xm = std::accumulate(xs_sorted.begin(), xs_sorted.end(), 0.0) /
                static_cast<double>(xs_sorted.size());
    double xv = 0.0;
    for (double v : xs_sorted) xv += (v - xm) * (v - xm);
    double sd = xs_sorted.size() > 1
                    ? std::sqrt(xv / static_cast<double>(xs_sorted.size() - 1))
                    : 0.0;
    double iqr =
        xs_sorted[(3 * xs_sorted.size()) / 4] - xs_sorted[xs_sorted.size() / 4];
    x_scale = std::min(sd, iqr / 1.349);
    if (x_scale <= 0.0) x_scale = sd;
  }

  // Tangent canonicalization. The level pins only the decision threshold, so
  // every line through the optimal (threshold, level) pivot ties; the element
  // we report is the tangent of the level-to-threshold frontier at this
  // level. Each empirical pivot carries slow cube-root noise, so the tangent
  // is not read off the pivots themselves. Instead, per slope-sign branch:
  //   1. anchor: average the exact per-level optimal thresholds over a short
  //      symmetric window of nearby levels (same suffix/prefix sweep as the
  //      scan above; the window is halved while any level's optimum runs off
  //      the data range).
  //   2. tangent: solve the local-cubic estimating equations
  //        sum_i w_i t_i^k V(P(t_i), y_i) = 0,  k = 0..3,
  //      for a polynomial P in the scaled offset t = (x - anchor)/h with
  //      Epanechnikov weights w_i = 1 - t_i^2 and bandwidth h = 1.2 times
  //      the robust x spread. Where V has a positive prediction derivative
  //      this is Newton on a symmetric positive-definite system (for the
  //      mean it reduces to one weighted least-squares solve); a flat
  //      derivative (quantiles) leaves the system singular and reports no
  //      tangent. P's own crossing of the level and its derivative there
  //      give the returned line.
  auto pivot_anchor = [&](int branch) -> std::optional<double> {
    const int m0 = 33;
    const int half = (m0 - 1) / 2;
    double delta = 0.1 * (1.0 + std::abs(eta));
    std::vector<double> vj(xs.size());
    for (int attempt = 0; attempt < 6; ++attempt, delta *= 0.5) {
      double tsum = 0.0;
      bool ok = true;
      for (int j = 0; j < m0 && ok; ++j) {
        double etaj = eta + delta * (j - half) / static_cast<double>(half);
        for (std::size_t r = 0; r < xs.size(); ++r)
          vj[r] = identification_value(
              spec, etaj, data.y[static_cast<Eigen::Index>(order[r])]);
        // exact best threshold cell at this level: running inclusion sums
        // over x-ranks, edges (all-in / all-out) tracked separately
        double best_in = kInf, edge = kInf;
        std::size_t kbest = 0;
        long double acc = 0.0L;
        if (branch > 0) {
          edge = 0.0;  // cell n: include nothing
          for (std::size_t k = xs.size(); k-- > 0;) {
            acc += vj[k];
            double s = static_cast<double>(acc);  // suffix sum for cell k
            if (k == 0)
              edge = std::min(edge, s);  // cell 0: all in
            else if (xs_sorted[k - 1] != xs_sorted[k] && s < best_in) {
              best_in = s;
              kbest = k;
            }
          }
        } else {
          edge = 0.0;  // k = 0: include nothing
          for (std::size_t k = 1; k <= xs.size(); ++k) {
            acc += vj[k - 1];
            double s = static_cast<double>(acc);
            if (k == xs.size()) continue;
            if (xs_sorted[k - 1] == xs_sorted[k]) continue;
            if (s < best_in) {
              best_in = s;
              kbest = k;
            }
          }
          edge = std::min(edge, static_cast<double>(acc));  // k = n: all in
        }
        if (!std::isfinite(best_in) ||
            edge < best_in - 1e-12 * (1.0 + std::abs(best_in))) {
          ok = false;  // optimum runs off the data range at this level
          break;
        }
        tsum += 0.5 * (xs_sorted[kbest - 1] + xs_sorted[kbest]);
      }
      evals += m0;
      if (ok) return tsum / m0;
    }
    return std::nullopt;
  };

  auto tangent_fit = [&](int branch) -> std::optional<std::pair<double, double>> {
    if (x_scale <= 0.0) return std::nullopt;
    auto anchor = pivot_anchor(branch);
    if (!anchor) return std::nullopt;
    const double theta_c = *anchor;
    double h = 1.2 * x_scale;
    for (int widen = 0; widen < 3; ++widen, h *= 1.5) {
      auto lo = std::lower_bound(xs_sorted.begin(), xs_sorted.end(), theta_c - h);
      auto hi = std::upper_bound(xs_sorted.begin(), xs_sorted.end(), theta_c + h);
      if (hi - lo < 30) continue;  // too few samples in window: widen
      Eigen::Vector4d c = Eigen::Vector4d::Zero();  // P(t) = sum_a c[a] t^a
      c[0] = eta;
      c[1] = branch * 0.1;
      bool solved = false;
      for (int it = 0; it < 30; ++it) {
        Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
        Eigen::Vector4d F = Eigen::Vector4d::Zero();
        double wsum = 0.0;
        for (auto p = lo; p != hi; ++p) {
          std::size_t r = static_cast<std::size_t>(p - xs_sorted.begin());
          double t = (xs_sorted[r] - theta_c) / h;
          double w = 1.0 - t * t;
          if (w <= 0.0) continue;
          double z = ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
          double yv = data.y[static_cast<Eigen::Index>(order[r])];
          double val = identification_value(spec, z, yv);
          double der = identification_slope(spec, z, yv);
          double tq[4] = {1.0, t, t * t, t * t * t};
          for (int a = 0; a < 4; ++a) {
            F[a] += w * tq[a] * val;
            for (int b = a; b < 4; ++b) J(a, b) += w * tq[a] * tq[b] * der;
          }
          wsum += w;
        }
        evals += static_cast<long>(hi - lo);
        for (int a = 1; a < 4; ++a)
          for (int b = 0; b < a; ++b) J(a, b) = J(b, a);
        if (!(J(0, 0) > 1e-10 * wsum)) return std::nullopt;  // V flat in z
        double fn = F.cwiseAbs().maxCoeff();
        if (!std::isfinite(fn)) return std::nullopt;
        if (fn <= 1e-9 * wsum * (1.0 + std::abs(eta))) {
          solved = true;
          break;
        }
        Eigen::Vector4d step = J.ldlt().solve(F);
        if (!step.allFinite()) return std::nullopt;
        c -= step;
        if (step.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + std::abs(eta))) {
          solved = true;  // stalled at machine precision
          break;
        }
      }
      if (!solved) return std::nullopt;
      // P's own crossing of the level, in t units
      double t = 0.0;
      for (int it = 0; it < 12; ++it) {
        double f = ((c[3] * t + c[2]) * t + c[1]) * t + c[0] - eta;
        double fp = (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1];
        if (fp == 0.0) break;
        double st = f / fp;
        t -= st;
        if (std::abs(st) <= 1e-14) break;
      }
      if (!std::isfinite(t) || std::abs(t) > 0.5) t = 0.0;
      double slope = ((3.0 * c[3] * t + 2.0 * c[2]) * t + c[1]) / h;
      if (!(branch > 0 ? slope > 0.0 : slope < 0.0)) return std::nullopt;
      double s = clamp_slope(slope);
      if (branch > 0 ? s <= 0.0 : s >= 0.0) return std::nullopt;
      return std::make_pair(s, theta_c + t * h);
    }
    return std::nullopt;
  };

  auto slope_for = [&](double theta, int branch) {
    // fallback slope: LS of (y - eta) on (x - theta), clamped to the branch
    // sign and bounds
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double dx = xs[static_cast<std::size_t>(i)] - theta;
      num += dx * (data.y[i] - y_mean_eta);
      den += dx * dx;
    }
    double s = den > 0.0 ? num / den : branch * 1.0;
    double inset = 1e-6 / span;
    if (branch > 0)
      s = std::max(s, inset);
    else
      s = std::min(s, -inset);
    return clamp_slope(s);
  };
  auto cell_range = [&](const Cell& c, double& tlo, double& thi) {
    tlo = (c.k == 0) ? xs_sorted.front() - span : xs_sorted[c.k - 1];
    thi = (c.k == xs.size()) ? xs_sorted.back() + span : xs_sorted[c.k];
  };
  auto cell_mse = [&](const Cell& c, double& theta_out, double& slope_out) {
    double tlo, thi;
    cell_range(c, tlo, thi);
    double w = thi - tlo;
    double a = tlo + 0.05 * w, b = thi - 0.05 * w;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto g = [&](double theta) {
      double s = slope_for(theta, c.branch);
      ParamVector beta(2);
      beta << eta - s * theta, s;
      return mse_of(family, beta, data);
    };
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 60 && (b - a) > 1e-10 * (1.0 + std::abs(a)); ++it) {
      if (g1 <= g2) {
        b = x2;
        x2 = x1;
        g2 = g1;
        x1 = b - gr * (b - a);
        g1 = g(x1);
      } else {
        a = x1;
        x1 = x2;
        g1 = g2;
        x2 = a + gr * (b - a);
        g2 = g(x2);
      }
    }
    theta_out = 0.5 * (a + b);
    slope_out = slope_for(theta_out, c.branch);
    ParamVector beta(2);
    beta << eta - slope_out * theta_out, slope_out;
    return mse_of(family, beta, data);
  };

  // Standard error of the mean elementary score at the scan minimum: the
  // tangent point is accepted when its exact risk is within the relative
  // ftol plus one such standard error of the minimum -- statistically tied.
  double se_best = 0.0;
  for (const auto& c : cells) {
    if (c.objective > fstar + tie_tol) continue;
    long double ss = 0.0L;
    for (std::size_t r = 0; r < xs.size(); ++r) {
      bool incl = c.branch > 0 ? r >= c.k : r < c.k;
      double yv = data.y[static_cast<Eigen::Index>(order[r])];
      double si = ((incl ? 1.0 : 0.0) - (eta <= yv ? 1.0 : 0.0)) * v_sorted[r];
      ss += (si - fstar) * (si - fstar);
    }
    if (xs.size() > 1)
      se_best = std::sqrt(static_cast<double>(ss) / (xs.size() - 1) /
                          static_cast<double>(xs.size()));
    break;
  }
  const double accept = opt.ftol_flag * (1.0 + std::abs(fstar)) + se_best;

  FitResult out;
  out.converged = true;

  // Tangent canonicalization needs enough data to resolve the local
  // frontier; below that, fall through to the exact cell representative.
  if (n >= 500) {
    double branch_floor[2] = {kInf, kInf};
    for (const auto& c : cells) {
      double& f = branch_floor[c.branch > 0 ? 0 : 1];
      f = std::min(f, c.objective);
    }
    double cand_obj = kInf, cand_mse = kInf;
    ParamVector cand;
    for (int branch : {+1, -1}) {
      // any line of this sign scores at least the branch's best cell
      if (branch_floor[branch > 0 ? 0 : 1] > fstar + accept) continue;
      auto ef = tangent_fit(branch);
      if (!ef) continue;
      ParamVector beta(2);
      beta << eta - ef->first * ef->second, ef->first;
      double obj = elementary_risk(spec, eta, family, beta, data);
      ++evals;
      if (obj > fstar + accept) continue;
      double mse = mse_of(family, beta, data);
      ++evals;
      if (obj < cand_obj - tie_tol ||
          (obj <= cand_obj + tie_tol && mse < cand_mse)) {
        cand_obj = obj;
        cand_mse = mse;
        cand = beta;
      }
    }
    if (cand.size() == 2) {
      out.beta = cand;
      out.objective = cand_obj;
      return out;
    }
  }

  // Fallback: constrained least squares inside each tied cell (line pinned
  // through (theta, eta)); exact minimizer of the scanned objective.
  for (const auto& c : cells) {
    if (c.objective > fstar + tie_tol) continue;
    double theta = 0.0, slope = 0.0;
    double mse = cell_mse(c, theta, slope);
    evals += 70;
    if (mse < best_mse) {
      best_mse = mse;
      best_beta.resize(2);
      best_beta << eta - slope * theta, slope;
    }
  }

  out.beta = best_beta;
  out.objective = elementary_risk(spec, eta, family, out.beta, data);
  ++evals;
  // the continuous-parameter evaluation must land in the chosen cell; allow
  // only the tie tolerance
  if (out.objective > fstar + tie_tol + 1e-12 * (1.0 + std::abs(fstar))) {
    // fall back to a plain representative of the best cell
    for (const auto& c : cells) {
      if (c.objective > fstar + tie_tol) continue;
      double tlo, thi;
      cell_range(c, tlo, thi);
      double theta = 0.5 * (tlo + thi);
      double s = c.branch > 0 ? 1.0 : -1.0;
      ParamVector beta(2);
      beta << eta - s * theta, s;
      double obj = elementary_risk(spec, eta, family, beta, data);
      ++evals;
      if (obj <= fstar + tie_tol) {
        out.beta = beta;
        out.objective = obj;
        break;
      }
    }
  }
  return out;
}

}  // namespace

FitResult fit_elementary(const FunctionalSpec& spec, double eta,
                         const ModelFamily& family, const Dataset& data,
                         const OptimizerConfig& opt) {
  family.validate();
  data.validate();
  if (!std::isfinite(eta)) throw NonFiniteValue("eta must be finite");

  long evals = 0;
  const int d = family.param_dim();

  if (family.kind == ModelKind::LinearWithIntercept && family.dim == 1 &&
      data.dim() == 1) {
    bool intercept_free = family.bounds.empty() ||
                          (std::isinf(family.bounds[0].lo) && std::isinf(family.bounds[0].hi));
    if (intercept_free) {
      auto r = fit_elementary_affine1(spec, eta, family, data, opt, evals);
      r.evaluations = evals;
      return r;
    }
  }

  Box box = resolve_box(family, data, opt);
  auto objective = [&](const ParamVector& beta) {
    ++evals;
    return elementary_risk(spec, eta, family, beta, data);
  };

  if (d == 1) {
    // One free parameter means z_i(beta) = s_i * beta (s_i = 1 for the
    // constant family, s_i = x_i for a single covariate through the origin),
    // so sample i toggles its inclusion {eta <= z_i} at the single breakpoint
    // t_i = eta / s_i. The objective is piecewise constant in beta and the
    // global minimum is exact: sweep the sorted breakpoints with prefix and
    // suffix sums, then canonicalize the optimal plateau by least squares.
    const bool through_origin = (family.kind == ModelKind::LinearNoIntercept);
    if (through_origin && data.dim() != 1)
      throw DimensionMismatch("single-covariate family requires 1-d covariates");

    auto eo = ElementaryObjective::make(spec, eta, data);
    const auto n = data.n();
    evals += static_cast<long>(n);
    const double lo = box[0].first, hi = box[0].second;

    double base = 0.0;  // samples whose inclusion never depends on beta
    std::vector<double> et, ev, lt, lv;  // entering / leaving events (t, v)
    et.reserve(static_cast<std::size_t>(n));
    ev.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = through_origin ? data.x(i, 0) : 1.0;
      if (s > 0.0) {
        et.push_back(eta / s);  // included for beta >= t
        ev.push_back(eo.v[i]);
      } else if (s < 0.0) {
        lt.push_back(eta / s);  // included for beta <= t
        lv.push_back(eo.v[i]);
      } else if (eta <= 0.0) {
        base += eo.v[i];
      }
    }
    auto sort_events = [](std::vector<double>& t, std::vector<double>& v) {
      std::vector<std::size_t> ord(t.size());
      std::iota(ord.begin(), ord.end(), 0);
      std::sort(ord.begin(), ord.end(),
                [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
      std::vector<double> ts(t.size()), vs(t.size());
      for (std::size_t k = 0; k < ord.size(); ++k) {
        ts[k] = t[ord[k]];
        vs[k] = v[ord[k]];
      }
      t = std::move(ts);
      v = std::move(vs);
    };
    sort_events(et, ev);
    sort_events(lt, lv);
    std::vector<double> epre(et.size() + 1, 0.0), lsuf(lt.size() + 1, 0.0);
    {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < et.size(); ++k) {
        acc += ev[k];
        epre[k + 1] = static_cast<double>(acc);
      }
      acc = 0.0L;
      for (std::size_t k = lt.size(); k > 0; --k) {
        acc += lv[k - 1];
        lsuf[k - 1] = static_cast<double>(acc);
      }
    }
    auto j_exact = [&](double b) {
      ++evals;
      auto ne = static_cast<std::size_t>(
          std::upper_bound(et.begin(), et.end(), b) - et.begin());
      auto nl = static_cast<std::size_t>(
          std::lower_bound(lt.begin(), lt.end(), b) - lt.begin());
      return (base + epre[ne] + lsuf[nl]) * eo.inv_n + eo.constant;
    };

    std::vector<double> bps;
    bps.reserve(et.size() + lt.size());
    for (double t : et)
      if (t >= lo && t <= hi) bps.push_back(t);
    for (double t : lt)
      if (t >= lo && t <= hi) bps.push_back(t);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    // One candidate per breakpoint plus one per open cell between
    // consecutive breakpoints (and the box edges) covers every value the
    // objective takes on the box.
    enum class Kind { Edge, Breakpoint, Midpoint };
    struct Cand {
      double b;
      Kind kind;
      double j;
    };
    std::vector<Cand> cands;
    cands.reserve(2 * bps.size() + 3);
    cands.push_back({lo, Kind::Edge, 0.0});
    for (std::size_t k = 0; k < bps.size(); ++k) {
      double left = (k == 0) ? lo : bps[k - 1];
      if (bps[k] > left)
        cands.push_back({0.5 * (left + bps[k]), Kind::Midpoint, 0.0});
      cands.push_back({bps[k], Kind::Breakpoint, 0.0});
    }
    if (bps.empty() || hi > bps.back())
      cands.push_back({0.5 * ((bps.empty() ? lo : bps.back()) + hi), Kind::Midpoint, 0.0});
    cands.push_back({hi, Kind::Edge, 0.0});
    for (auto& c : cands) c.j = j_exact(c.b);

    double fstar = kInf;
    for (const auto& c : cands) fstar = std::min(fstar, c.j);
    double tie_tol = std::max(1e-14, 1e-10 * (1.0 + std::abs(fstar)));

    // Unconstrained least-squares parameter; clamped into each optimal
    // plateau below to pick the canonical representative.
    double ls;
    if (through_origin) {
      double num = 0.0, den = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        num += data.x(i, 0) * data.y[i];
        den += data.x(i, 0) * data.x(i, 0);
      }
      ls = den > 0.0 ? num / den : 0.0;
    } else {
      ls = data.y.mean();
    }

    double best_b = cands.front().b, best_mse = kInf;
    std::optional<std::pair<double, double>> best_interval;
    std::size_t i = 0;
    while (i < cands.size()) {
      if (cands[i].j > fstar + tie_tol) {
        ++i;
        continue;
      }
      std::size_t first = i;
      while (i + 1 < cands.size() && cands[i + 1].j <= fstar + tie_tol) ++i;
      std::size_t last = i;
      ++i;

      // A run ending in a cell midpoint extends over the whole open cell;
      // widen the clamp range to just inside the bounding breakpoint.
      double span_lo = cands[first].b, span_hi = cands[last].b;
      std::optional<double> edge_lo, edge_hi;
      if (cands[first].kind == Kind::Breakpoint) {
        edge_lo = cands[first].b;
      } else if (cands[first].kind == Kind::Midpoint && first > 0 &&
                 cands[first - 1].kind == Kind::Breakpoint) {
        edge_lo = cands[first - 1].b;
        span_lo = std::min(span_lo, std::nextafter(*edge_lo, kInf));
      }
      if (cands[last].kind == Kind::Breakpoint) {
        edge_hi = cands[last].b;
      } else if (cands[last].kind == Kind::Midpoint && last + 1 < cands.size() &&
                 cands[last + 1].kind == Kind::Breakpoint) {
        edge_hi = cands[last + 1].b;
        span_hi = std::max(span_hi, std::nextafter(*edge_hi, -kInf));
      }

      double b = std::min(std::max(ls, span_lo), span_hi);
      ParamVector p(1);
      p[0] = b;
      double mse = mse_of(family, p, data);
      if (mse < best_mse) {
        best_mse = mse;
        best_b = b;
        // Report the plateau only when both of its edges are interior
        // breakpoints; a plateau running into the search box edge is a
        // half-line whose extent would be an artifact of the box.
        if (edge_lo && edge_hi && *edge_hi > *edge_lo)
          best_interval = std::make_pair(*edge_lo, *edge_hi);
        else
          best_interval.reset();
      }
    }

    FitResult out;
    out.beta.resize(1);
    out.beta[0] = best_b;
    out.objective = objective(out.beta);
    out.converged = true;
    out.minimizer_interval = best_interval;
    // The continuous evaluation must agree with the sweep up to ties; fall
    // back to a sweep candidate if rounding at a breakpoint flipped a sample.
    double slack = tie_tol + 1e-12 * (1.0 + std::abs(fstar));
    if (out.objective > fstar + slack) {
      for (const auto& c : cands) {
        if (c.j > fstar + tie_tol) continue;
        ParamVector p(1);
        p[0] = c.b;
        double obj = objective(p);
        if (obj <= fstar + slack) {
          out.beta = p;
          out.objective = obj;
          break;
        }
      }
    }
    out.evaluations = evals;
    return out;
  }

  // generic path: multistart simplex on the elementary risk, then a
  // penalized mean-squared-error pass to canonicalize within the flat
  // optimal set
  auto ms = multistart_minimize(objective, box, opt);
  double fstar = ms.best.f;
  double tie_tol = std::max(1e-14, 1e-10 * (1.0 + std::abs(fstar)));
  double penalty = 1e12 * (1.0 + std::abs(fstar));
  auto penalized = [&](const ParamVector& beta) {
    double j = objective(beta);
    double excess = j - (fstar + tie_tol);
    return mse_of(family, beta, data) + (excess > 0.0 ? penalty * (1.0 + excess) : 0.0);
  };
  auto polished = nelder_mead(penalized, ms.best.x, box, opt.xtol, opt.max_iter, 0.02);

  FitResult out;
  out.beta = ms.best.x;
  out.objective = fstar;
  double jp = objective(polished.x);
  if (jp <= fstar + tie_tol) {
    out.beta = polished.x;
    out.objective = jp;
  }
  out.converged = ms.converged;
  out.evaluations = evals;
  return out;
}

}  // namespace elicit
