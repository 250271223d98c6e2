#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "elicit/calibration.hpp"
#include "elicit/synthetic.hpp"

using namespace elicit;

namespace {

// predictions on a deterministic grid with observations displaced by `shift`
void grid_pairs(int n, double shift, Eigen::VectorXd& z, Eigen::VectorXd& y) {
  z.resize(n);
  y.resize(n);
  for (int i = 0; i < n; ++i) {
    z[i] = 10.0 * i / (n - 1);
    y[i] = z[i] + shift;
  }
}

}  // namespace

TEST_CASE("mean diagnostic bins reproduce the direct identity") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(200), y(200);
  for (int i = 0; i < 200; ++i) {
    z[i] = gauss(rng);
    y[i] = z[i] + gauss(rng);
  }
  auto rep = calibration_diagnostic(FunctionalSpec::mean(), z, y);
  REQUIRE(rep.bins.size() == 10);
  long total = 0;
  for (const auto& bin : rep.bins) {
    total += bin.count;
    if (bin.count == 0) continue;
    // mean_v for the Mean functional is exactly lo - (bin average of y)
    double acc = 0.0;
    for (int i = 0; i < 200; ++i) {
      bool inside = (z[i] >= bin.lo) &&
                    (z[i] < bin.hi || (&bin == &rep.bins.back() && z[i] <= bin.hi));
      if (inside) acc += y[i];
    }
    CHECK(bin.mean_v ==
          doctest::Approx(bin.lo - acc / bin.count).epsilon(1e-12));
  }
  CHECK(total == 200);
  // bins partition [min prediction, max prediction]
  CHECK(rep.bins.front().lo == doctest::Approx(z.minCoeff()));
  CHECK(rep.bins.back().hi == doctest::Approx(z.maxCoeff()));
  for (std::size_t b = 1; b < rep.bins.size(); ++b)
    CHECK(rep.bins[b].lo == rep.bins[b - 1].hi);
}

TEST_CASE("exact predictions are calibrated with zero violation") {
  Eigen::VectorXd z, y;
  grid_pairs(100, 0.0, z, y);
  for (auto spec : {FunctionalSpec::mean(), FunctionalSpec::quantile(0.5),
                    FunctionalSpec::expectile(0.3)}) {
    auto rep = calibration_diagnostic(spec, z, y);
    CHECK(rep.pass);
    CHECK(rep.overall == 0.0);
    for (const auto& bin : rep.bins) {
      CHECK(bin.mean_v <= 1e-12);
      CHECK(bin.mean_v_right >= -1e-12);
    }
  }
}

TEST_CASE("systematic bias fails the appropriate one-sided check") {
  Eigen::VectorXd z, y;

  grid_pairs(500, 1.0, z, y);  // observations above predictions
  auto low = calibration_diagnostic(FunctionalSpec::mean(), z, y);
  CHECK_FALSE(low.pass);
  CHECK(low.overall > 3.0);
  bool right_side_broken = false;
  for (const auto& bin : low.bins)
    if (!bin.pass && bin.mean_v_right < 0.0) right_side_broken = true;
  CHECK(right_side_broken);

  grid_pairs(500, -1.0, z, y);  // observations below predictions
  auto high = calibration_diagnostic(FunctionalSpec::mean(), z, y);
  CHECK_FALSE(high.pass);
  bool left_side_broken = false;
  for (const auto& bin : high.bins)
    if (!bin.pass && bin.mean_v > 0.0) left_side_broken = true;
  CHECK(left_side_broken);
}

TEST_CASE("too few observations per bin is a width error") {
  Eigen::VectorXd z, y;
  grid_pairs(49, 0.0, z, y);
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y, 10), WidthError);
  CHECK_NOTHROW(calibration_diagnostic(FunctionalSpec::mean(), z, y, 9));
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y, 0), InvalidSpec);
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y, 10,
                                         BinningMode::EqualCount, 0.0),
                  InvalidSpec);
}

TEST_CASE("all-equal predictions collapse to one two-sided bin") {
  std::mt19937_64 rng(67);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) y[i] = gauss(rng);
  double ybar = y.mean();

  auto at_mean = calibration_diagnostic(
      FunctionalSpec::mean(), Eigen::VectorXd::Constant(100, ybar), y);
  REQUIRE(at_mean.bins.size() == 1);
  CHECK(at_mean.bins[0].count == 100);
  CHECK(at_mean.pass);
  CHECK(at_mean.bins[0].mean_v == doctest::Approx(0.0));

  auto off_mean = calibration_diagnostic(
      FunctionalSpec::mean(), Eigen::VectorXd::Constant(100, ybar + 1.0), y);
  CHECK_FALSE(off_mean.pass);
  CHECK(off_mean.overall > 3.0);
}

TEST_CASE("explicit bin edges are validated and honored") {
  Eigen::VectorXd z, y;
  grid_pairs(100, 0.0, z, y);

  auto rep = calibration_diagnostic(FunctionalSpec::mean(), z, y,
                                    std::vector<double>{0.0, 2.5, 5.0, 10.0});
  REQUIRE(rep.bins.size() == 3);
  CHECK(rep.bins[1].lo == 2.5);
  CHECK(rep.bins[1].hi == 5.0);
  CHECK(rep.bins[0].count + rep.bins[1].count + rep.bins[2].count == 100);
  CHECK(rep.pass);

  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y,
                                         std::vector<double>{0.0}),
                  InvalidSpec);
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y,
                                         std::vector<double>{0.0, 0.0, 10.0}),
                  InvalidSpec);
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y,
                                         std::vector<double>{2.0, 10.0}),
                  OutOfRange);  // predictions below the first edge
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y,
                                         std::vector<double>{0.0, 9.0}),
                  OutOfRange);  // predictions above the last edge
  std::vector<double> many;
  for (int k = 0; k <= 30; ++k) many.push_back(k / 3.0);
  CHECK_THROWS_AS(calibration_diagnostic(FunctionalSpec::mean(), z, y, many),
                  WidthError);
}

TEST_CASE("equal-width binning spaces edges evenly") {
  Eigen::VectorXd z, y;
  grid_pairs(100, 0.0, z, y);
  auto rep = calibration_diagnostic(FunctionalSpec::mean(), z, y, 5,
                                    BinningMode::EqualWidth);
  REQUIRE(rep.bins.size() == 5);
  for (int b = 0; b < 5; ++b) {
    CHECK(rep.bins[b].lo == doctest::Approx(2.0 * b));
    CHECK(rep.bins[b].hi == doctest::Approx(2.0 * b + 2.0));
  }
  long total = 0;
  for (const auto& bin : rep.bins) total += bin.count;
  CHECK(total == 100);
}

TEST_CASE("equal-count binning balances member counts") {
  std::mt19937_64 rng(71);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(300), y(300);
  for (int i = 0; i < 300; ++i) {
    z[i] = gauss(rng);
    y[i] = z[i];
  }
  auto rep = calibration_diagnostic(FunctionalSpec::mean(), z, y, 10);
  REQUIRE(rep.bins.size() == 10);
  for (const auto& bin : rep.bins) {
    CHECK(bin.count >= 28);
    CHECK(bin.count <= 32);
  }
}

TEST_CASE("merging adjacent passing bins keeps the merged bin passing") {
  Eigen::VectorXd z, y;
  grid_pairs(120, 0.0, z, y);  // exactly calibrated: every check holds with margin
  std::vector<double> fine = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  auto before = calibration_diagnostic(FunctionalSpec::mean(), z, y, fine);
  REQUIRE(before.pass);
  std::vector<double> merged = {0.0, 4.0, 8.0, 10.0};
  auto after = calibration_diagnostic(FunctionalSpec::mean(), z, y, merged);
  CHECK(after.pass);
  CHECK(after.overall == 0.0);
}

TEST_CASE("calibrated noise passes at the default threshold across seeds") {
  int passes = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) + 1000);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd z(400), y(400);
    for (int i = 0; i < 400; ++i) {
      z[i] = gauss(rng);
      y[i] = z[i] + gauss(rng);  // conditional mean equals the prediction
    }
    if (calibration_diagnostic(FunctionalSpec::mean(), z, y).pass) ++passes;
  }
  CHECK(passes >= 95);
}

TEST_CASE("harness on a constant family agrees at the sample mean") {
  std::mt19937_64 rng(73);
  std::normal_distribution<double> gauss;
  Dataset d;
  d.x.resize(50, 1);
  d.y.resize(50);
  for (int i = 0; i < 50; ++i) {
    d.x(i, 0) = gauss(rng);
    d.y[i] = 2.0 + gauss(rng);
  }
  double ybar = d.y.mean();
  std::vector<double> etas = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  auto rep = theorem1_harness(FunctionalSpec::mean(), ModelFamily::constant(), d, etas);
  CHECK(rep.applicable);
  CHECK(rep.spread <= 1e-9);
  CHECK(rep.consensus[0] == doctest::Approx(ybar).epsilon(1e-9));
  CHECK(rep.calibration.pass);
  CHECK(rep.calibration.bins.size() == 1);
}

TEST_CASE("harness accepts the correctly specified linear model") {
  GeneratorSpec g;
  g.kind = GeneratorKind::Cubic;  // reuse the x-stream; y rebuilt below
  g.n = 20000;
  g.seed = 404;
  g.noise_sd = 0.0;
  Dataset d = generate(g);
  std::mt19937_64 rng(405);
  std::normal_distribution<double> gauss;
  for (Eigen::Index i = 0; i < d.n(); ++i)
    d.y[i] = 1.0 + 2.0 * d.x(i, 0) + gauss(rng);

  std::vector<double> etas;
  for (int k = 0; k < 9; ++k) etas.push_back(-1.0 + 4.0 * k / 8.0);
  auto rep = theorem1_harness(FunctionalSpec::mean(),
                              ModelFamily::linear_with_intercept(1), d, etas);
  CHECK(rep.applicable);
  CHECK(rep.spread <= 0.25);
  CHECK(rep.consensus[0] == doctest::Approx(1.0).epsilon(0.08));
  CHECK(rep.consensus[1] == doctest::Approx(2.0).epsilon(0.08));
  CHECK(rep.calibration.pass);
}

TEST_CASE("harness flags the misspecified through-origin fit on curved truth") {
  GeneratorSpec g;
  g.kind = GeneratorKind::Quadratic;
  g.n = 5000;
  g.seed = 7;
  Dataset d = generate(g);
  std::vector<double> etas = {-1.0, 0.25, 1.0, 4.0};
  auto rep = theorem1_harness(FunctionalSpec::mean(),
                              ModelFamily::linear_no_intercept(1), d, etas);
  CHECK_FALSE(rep.applicable);
  CHECK(rep.spread >= 0.9);
  for (const auto& e : rep.per_eta) CHECK(e.ok);
}

TEST_CASE("harness surfaces a scan whose fits all fail") {
  Dataset d;
  d.x.resize(10, 1);
  d.y.resize(10);
  for (int i = 0; i < 10; ++i) {
    d.x(i, 0) = i;
    d.y[i] = i;
  }
  CHECK_THROWS_AS(theorem1_harness(FunctionalSpec::mean(),
                                   ModelFamily::linear_no_intercept(2), d, {0.5}),
                  Error);
}
