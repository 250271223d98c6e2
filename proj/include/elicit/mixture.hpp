#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "elicit/functional.hpp"

namespace elicit {

/// Positive measure on the real line: point masses plus a piecewise-constant
/// density. Segment interiors must be pairwise disjoint; weights and
/// densities must be >= 0 and finite.
struct MixtureMeasure {
  struct Atom {
    double eta;
    double weight;
  };
  struct Segment {
    double lo;
    double hi;
    double density;
  };

  std::vector<Atom> atoms;
  std::vector<Segment> segments;

  /// Unit Lebesgue density on [lo, hi].
  static MixtureMeasure lebesgue(double lo, double hi, double density = 1.0);

  void validate() const;  // throws InvalidSpec / NonFiniteValue
};

/// Loss built by mixing elementary scores: sum of atom weights times
/// S_eta(z,y) plus segment densities times the integral of S_eta(z,y) deta.
/// The integrand vanishes outside (min(z,y), max(z,y)]; integrals restricted
/// there use closed forms for Mean (linear integrand) and Quantile (piecewise
/// constant), adaptive quadrature to relative tolerance 1e-10 otherwise.
double mixture_loss(const FunctionalSpec& spec, const MixtureMeasure& h,
                    double z, double y);

/// Convex generator for Bregman losses. Square is t^2, Quartic t^4;
/// TabulatedConvex interpolates a sampled convex function piecewise linearly
/// (second differences must be >= -1e-10, else NonConvex at construction).
class BregmanGenerator {
 public:
  static BregmanGenerator square();
  static BregmanGenerator quartic();
  static BregmanGenerator tabulated(std::vector<double> t, std::vector<double> phi);

  double value(double t) const;       // phi(t); OutOfRange outside a tabulation
  double left_slope(double t) const;  // phi'(t); left derivative for tabulated
  bool is_tabulated() const { return kind_ == Kind::Tabulated; }

 private:
  enum class Kind { Square, Quartic, Tabulated };
  Kind kind_ = Kind::Square;
  std::vector<double> grid_;
  std::vector<double> values_;
};

/// L_phi(z, y) = phi(y) - phi(z) - phi'(z)(y - z).
double bregman_loss(const BregmanGenerator& phi, double z, double y);

/// Piecewise-constant-density approximation of the mixing measure with
/// density phi'' on [window.first, window.second], built from second
/// differences of phi on a uniform grid with `resolution` cells
/// (resolution >= 2). Exact for Square (constant density 2).
MixtureMeasure mixture_from_generator(const BregmanGenerator& phi,
                                      std::pair<double, double> window,
                                      int resolution);

}  // namespace elicit
