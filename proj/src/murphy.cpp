#include "elicit/murphy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace elicit {

namespace {

// Fenwick tree over sample ranks holding (count, sum of y); supports removal
// and prefix queries. Used for the kinds whose elementary mean couples the
// prediction order statistics with the observation order statistics.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : cnt_(n + 1, 0.0), sum_(n + 1, 0.0) {}

  void add(std::size_t pos, double c, double s) {
    for (std::size_t i = pos + 1; i < cnt_.size(); i += i & (~i + 1)) {
      cnt_[i] += c;
      sum_[i] += s;
    }
  }

  // totals over ranks [0, k)
  std::pair<double, double> prefix(std::size_t k) const {
    double c = 0.0, s = 0.0;
    for (std::size_t i = k; i > 0; i -= i & (~i + 1)) {
      c += cnt_[i];
      s += sum_[i];
    }
    return {c, s};
  }

 private:
  std::vector<double> cnt_;
  std::vector<double> sum_;
};

struct ZOrder {
  std::vector<double> z;        // ascending
  std::vector<double> y;        // y in z-order
  std::vector<double> suf_y;    // suffix sums of y in z-order
  std::vector<double> suf_y2;   // suffix sums of y^2 in z-order
};

struct YOrder {
  std::vector<double> y;       // ascending
  std::vector<double> suf_y;   // suffix sums
  std::vector<double> suf_y2;  // suffix sums of squares
};

std::vector<double> suffix_sums(const std::vector<double>& v, bool squares) {
  std::vector<double> out(v.size() + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t i = v.size(); i > 0; --i) {
    double t = v[i - 1];
    acc += squares ? static_cast<long double>(t) * t : static_cast<long double>(t);
    out[i - 1] = static_cast<double>(acc);
  }
  return out;
}

}  // namespace

std::uint64_t sample_fingerprint(const FunctionalSpec& spec, const Eigen::VectorXd& y) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](const void* p, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  int kind = static_cast<int>(spec.kind);
  double level = spec.level;
  std::int64_t n = y.size();
  mix(&kind, sizeof kind);
  mix(&level, sizeof level);
  mix(&n, sizeof n);
  mix(y.data(), sizeof(double) * static_cast<std::size_t>(y.size()));
  return h;
}

double MurphyCurve::evaluate(double eta) const {
  const auto& s = *samples;
  const auto n = s.z.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    acc += elementary_score(spec, eta, s.z[i], s.y[i]);
  return acc / static_cast<double>(n);
}

Eigen::VectorXd MurphyCurve::evaluate_sorted(const std::vector<double>& etas) const {
  const auto& smp = *samples;
  const std::size_t n = static_cast<std::size_t>(smp.z.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(etas.size()));
  if (etas.empty()) return out;

  ZOrder zo;
  {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return smp.z[static_cast<Eigen::Index>(a)] < smp.z[static_cast<Eigen::Index>(b)];
    });
    zo.z.resize(n);
    zo.y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      zo.z[k] = smp.z[static_cast<Eigen::Index>(order[k])];
      zo.y[k] = smp.y[static_cast<Eigen::Index>(order[k])];
    }
    zo.suf_y = suffix_sums(zo.y, false);
    zo.suf_y2 = suffix_sums(zo.y, true);
  }
  YOrder yo;
  {
    yo.y.assign(smp.y.data(), smp.y.data() + n);
    std::sort(yo.y.begin(), yo.y.end());
    yo.suf_y = suffix_sums(yo.y, false);
    yo.suf_y2 = suffix_sums(yo.y, true);
  }

  const bool needs_tree =
      spec.kind == FunctionalKind::Quantile || spec.kind == FunctionalKind::Expectile;
  Fenwick tree(needs_tree ? n : 0);
  double active_cnt = 0.0, active_sum = 0.0;
  std::vector<std::size_t> yrank_of_zorder;
  if (needs_tree) {
    // rank of each sample's y among all y values, ties broken stably so each
    // sample owns a distinct slot
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return smp.y[static_cast<Eigen::Index>(a)] < smp.y[static_cast<Eigen::Index>(b)];
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

    std::vector<std::size_t> zorder(n);
    for (std::size_t i = 0; i < n; ++i) zorder[i] = i;
    std::sort(zorder.begin(), zorder.end(), [&](std::size_t a, std::size_t b) {
      return smp.z[static_cast<Eigen::Index>(a)] < smp.z[static_cast<Eigen::Index>(b)];
    });
    yrank_of_zorder.resize(n);
    for (std::size_t k = 0; k < n; ++k) yrank_of_zorder[k] = rank[zorder[k]];

    for (std::size_t i = 0; i < n; ++i) {
      tree.add(rank[i], 1.0, smp.y[static_cast<Eigen::Index>(i)]);
      active_cnt += 1.0;
      active_sum += smp.y[static_cast<Eigen::Index>(i)];
    }
  }

  const double nd = static_cast<double>(n);
  const double level = spec.level;
  const double pool_lo = std::min(zo.z.front(), yo.y.front());
  const double pool_hi = std::max(zo.z.back(), yo.y.back());
  std::size_t zptr = 0;  // samples with z < eta are inactive

  for (std::size_t q = 0; q < etas.size(); ++q) {
    double eta = etas[q];
    if (q > 0 && eta < etas[q - 1])
      throw InvalidSpec("batch evaluation requires ascending query points");
    if (eta <= pool_lo || eta > pool_hi) {
      // every score term vanishes outside (min pooled, max pooled]
      out[static_cast<Eigen::Index>(q)] = 0.0;
      continue;
    }

    std::size_t zk =
        std::lower_bound(zo.z.begin(), zo.z.end(), eta) - zo.z.begin();
    if (needs_tree) {
      for (; zptr < zk; ++zptr)
        tree.add(yrank_of_zorder[zptr], -1.0, -zo.y[zptr]);
      active_cnt = static_cast<double>(n - zk);
      active_sum = zo.suf_y[zk];
    }
    double cz = static_cast<double>(n - zk);

    std::size_t yk_ge =
        std::lower_bound(yo.y.begin(), yo.y.end(), eta) - yo.y.begin();
    std::size_t yk_gt =
        std::upper_bound(yo.y.begin(), yo.y.end(), eta) - yo.y.begin();

    double a = 0.0, b = 0.0;
    switch (spec.kind) {
      case FunctionalKind::Mean:
        a = eta * cz - zo.suf_y[zk];
        b = eta * static_cast<double>(n - yk_ge) - yo.suf_y[yk_ge];
        break;
      case FunctionalKind::SecondMoment:
        a = eta * cz - zo.suf_y2[zk];
        b = eta * static_cast<double>(n - yk_ge) - yo.suf_y2[yk_ge];
        break;
      case FunctionalKind::Quantile: {
        auto [c_lt, s_lt] = tree.prefix(yk_ge);  // active with y < eta
        (void)s_lt;
        a = c_lt - level * cz;
        b = -level * static_cast<double>(n - yk_ge);
        break;
      }
      case FunctionalKind::Expectile: {
        auto [c_le, s_le] = tree.prefix(yk_gt);  // active with y <= eta
        double c_gt = active_cnt - c_le, s_gt = active_sum - s_le;
        a = 2.0 * level * (eta * c_le - s_le) +
            2.0 * (1.0 - level) * (eta * c_gt - s_gt);
        b = 2.0 * (1.0 - level) *
            (eta * static_cast<double>(n - yk_gt) - yo.suf_y[yk_gt]);
        break;
      }
    }
    out[static_cast<Eigen::Index>(q)] = (a - b) / nd;
  }
  return out;
}

MurphyCurve murphy_curve(const FunctionalSpec& spec,
                         const Eigen::VectorXd& predictions,
                         const Eigen::VectorXd& y, int refinement) {
  if (predictions.size() != y.size())
    throw DimensionMismatch("predictions/observations size mismatch");
  if (y.size() == 0) throw EmptyInput("murphy curve needs at least one pair");
  if (!predictions.allFinite() || !y.allFinite())
    throw NonFiniteValue("murphy curve inputs must be finite");
  if (refinement < 0) throw InvalidSpec("refinement must be >= 0");

  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(2 * y.size()));
  pooled.insert(pooled.end(), predictions.data(), predictions.data() + predictions.size());
  pooled.insert(pooled.end(), y.data(), y.data() + y.size());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> knots;
  knots.reserve(pooled.size() * (1 + refinement));
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    knots.push_back(pooled[i]);
    if (i + 1 < pooled.size())
      for (int j = 1; j <= refinement; ++j)
        knots.push_back(pooled[i] +
                        (pooled[i + 1] - pooled[i]) * j / (refinement + 1.0));
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  MurphyCurve curve;
  curve.spec = spec;
  curve.range_lo = pooled.front();
  curve.range_hi = pooled.back();
  curve.fingerprint = sample_fingerprint(spec, y);
  auto samples = std::make_shared<MurphyCurve::Samples>();
  samples->z = predictions;
  samples->y = y;
  curve.samples = std::move(samples);

  curve.knots = Eigen::Map<Eigen::VectorXd>(knots.data(),
                                            static_cast<Eigen::Index>(knots.size()));
  curve.value_at = curve.evaluate_sorted(knots);
  std::vector<double> right(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i)
    right[i] = knots[i] + delta_right(knots[i]);
  curve.value_right = curve.evaluate_sorted(right);
  return curve;
}

}  // namespace elicit
