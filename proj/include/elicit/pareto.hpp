#pragma once

#include <string>
#include <vector>

#include "elicit/fit.hpp"
#include "elicit/murphy.hpp"

namespace elicit {

// Result of comparing two Murphy curves over every threshold simultaneously.
//
// With a symmetric tolerance the weak verdicts (Dominates / DominatedBy
// without a strict witness) cannot occur: if A <= B + tol everywhere and B
// never exceeds A by more than tol, the two curves are Equal. The enum keeps
// the weak values so the verdict space is closed under negation, but
// dominates() only ever returns the other four.
enum class DominanceVerdict {
  Equal,
  StrictlyDominates,
  Dominates,
  Incomparable,
  DominatedBy,
  StrictlyDominatedBy,
};

struct DominanceResult {
  DominanceVerdict verdict = DominanceVerdict::Incomparable;
  // Threshold at which `margin` is attained.
  double witness_eta = 0.0;
  // StrictlyDominates: largest amount by which the first curve improves on
  // the second. StrictlyDominatedBy: symmetric. Equal: largest absolute gap
  // (<= tol). Incomparable: largest one-sided excess in either direction.
  double margin = 0.0;
};

// Compares two curves built from the same observations and functional. Both
// curves are piecewise linear between their pooled breakpoints, so the
// comparison is decided exactly by values and right limits on the union of
// the two knot sets. Throws FingerprintMismatch when the curves were built
// from different observations or functionals.
DominanceResult dominates(const MurphyCurve& a, const MurphyCurve& b,
                          double tol = 0.0);

struct ParetoEntry {
  bool optimal = true;
  // Index (into the input vector) of the first curve in input order that
  // strictly dominates this one; -1 when optimal.
  int dominated_by = -1;
};

// Filters a set of forecast curves down to the Pareto frontier under
// simultaneous-threshold dominance. All curves are evaluated once on the
// global union of knots; because every curve is linear between consecutive
// union knots, the verdicts agree with pairwise comparisons.
std::vector<ParetoEntry> pareto_filter(const std::vector<MurphyCurve>& curves,
                                       double tol = 0.0);

// One elementary-risk minimization per threshold, run in parallel. Failures
// are captured per entry instead of aborting the scan.
struct EtaScanEntry {
  double eta = 0.0;
  bool ok = false;
  FitResult result;
  std::string error;
};

std::vector<EtaScanEntry> eta_scan(const FunctionalSpec& spec,
                                   const ModelFamily& family,
                                   const Dataset& data,
                                   const std::vector<double>& etas,
                                   const OptimizerConfig& opt = {});

}  // namespace elicit
