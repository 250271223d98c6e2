#include "elicit/pareto.hpp"

#include <algorithm>
#include <cmath>

#include "elicit/io.hpp"

namespace elicit {

namespace {

std::vector<double> union_knots(const std::vector<const MurphyCurve*>& curves) {
  std::vector<double> u;
  for (const auto* c : curves)
    u.insert(u.end(), c->knots.begin(), c->knots.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

struct CurveTable {
  Eigen::VectorXd at;     // values at the union knots
  Eigen::VectorXd right;  // right limits at the union knots
};

CurveTable tabulate(const MurphyCurve& c, const std::vector<double>& knots) {
  std::vector<double> shifted(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i)
    shifted[i] = knots[i] + delta_right(knots[i]);
  return {c.evaluate_sorted(knots), c.evaluate_sorted(shifted)};
}

struct GapStats {
  double max_a_over_b = -std::numeric_limits<double>::infinity();
  double max_b_over_a = -std::numeric_limits<double>::infinity();
  double eta_a_over_b = 0.0;
  double eta_b_over_a = 0.0;
};

GapStats gaps(const CurveTable& a, const CurveTable& b,
              const std::vector<double>& knots) {
  GapStats g;
  auto feed = [&](double va, double vb, double eta) {
    if (va - vb > g.max_a_over_b) {
      g.max_a_over_b = va - vb;
      g.eta_a_over_b = eta;
    }
    if (vb - va > g.max_b_over_a) {
      g.max_b_over_a = vb - va;
      g.eta_b_over_a = eta;
    }
  };
  for (std::size_t i = 0; i < knots.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    feed(a.at[k], b.at[k], knots[i]);
    feed(a.right[k], b.right[k], knots[i]);
  }
  return g;
}

DominanceResult verdict_from_gaps(const GapStats& g, double tol) {
  DominanceResult r;
  bool a_within = g.max_a_over_b <= tol;
  bool b_within = g.max_b_over_a <= tol;
  if (a_within && b_within) {
    r.verdict = DominanceVerdict::Equal;
    if (g.max_a_over_b >= g.max_b_over_a) {
      r.margin = std::max(0.0, g.max_a_over_b);
      r.witness_eta = g.eta_a_over_b;
    } else {
      r.margin = std::max(0.0, g.max_b_over_a);
      r.witness_eta = g.eta_b_over_a;
    }
  } else if (a_within) {
    r.verdict = DominanceVerdict::StrictlyDominates;
    r.margin = g.max_b_over_a;
    r.witness_eta = g.eta_b_over_a;
  } else if (b_within) {
    r.verdict = DominanceVerdict::StrictlyDominatedBy;
    r.margin = g.max_a_over_b;
    r.witness_eta = g.eta_a_over_b;
  } else {
    r.verdict = DominanceVerdict::Incomparable;
    if (g.max_a_over_b >= g.max_b_over_a) {
      r.margin = g.max_a_over_b;
      r.witness_eta = g.eta_a_over_b;
    } else {
      r.margin = g.max_b_over_a;
      r.witness_eta = g.eta_b_over_a;
    }
  }
  return r;
}

}  // namespace

DominanceResult dominates(const MurphyCurve& a, const MurphyCurve& b,
                          double tol) {
  if (a.fingerprint != b.fingerprint)
    throw FingerprintMismatch(
        "curves were built from different observations or functionals");
  if (!(tol >= 0.0)) throw InvalidSpec("dominance tolerance must be >= 0");

  auto knots = union_knots({&a, &b});
  auto ta = tabulate(a, knots);
  auto tb = tabulate(b, knots);
  return verdict_from_gaps(gaps(ta, tb, knots), tol);
}

std::vector<ParetoEntry> pareto_filter(const std::vector<MurphyCurve>& curves,
                                       double tol) {
  if (!(tol >= 0.0)) throw InvalidSpec("dominance tolerance must be >= 0");
  std::vector<ParetoEntry> out(curves.size());
  if (curves.size() <= 1) return out;
  for (std::size_t i = 1; i < curves.size(); ++i)
    if (curves[i].fingerprint != curves[0].fingerprint)
      throw FingerprintMismatch(
          "curves were built from different observations or functionals");

  std::vector<const MurphyCurve*> ptrs;
  for (const auto& c : curves) ptrs.push_back(&c);
  auto knots = union_knots(ptrs);

  std::vector<CurveTable> tables(curves.size());
  parallel_for(curves.size(),
               [&](std::size_t i) { tables[i] = tabulate(curves[i], knots); });

  parallel_for(curves.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < curves.size(); ++j) {
      if (j == i) continue;
      GapStats g = gaps(tables[j], tables[i], knots);
      // j strictly dominates i: j never worse beyond tol, strictly better once
      if (g.max_a_over_b <= tol && g.max_b_over_a > tol) {
        out[i].optimal = false;
        out[i].dominated_by = static_cast<int>(j);
        break;
      }
    }
  });
  return out;
}

std::vector<EtaScanEntry> eta_scan(const FunctionalSpec& spec,
                                   const ModelFamily& family,
                                   const Dataset& data,
                                   const std::vector<double>& etas,
                                   const OptimizerConfig& opt) {
  if (etas.empty()) throw EmptyInput("eta scan needs at least one threshold");
  std::vector<EtaScanEntry> out(etas.size());
  parallel_for(etas.size(), [&](std::size_t i) {
    out[i].eta = etas[i];
    try {
      out[i].result = fit_elementary(spec, etas[i], family, data, opt);
      out[i].ok = true;
    } catch (const std::exception& e) {
      out[i].ok = false;
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace elicit
