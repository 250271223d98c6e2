#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "elicit/functional.hpp"

using namespace elicit;

TEST_CASE("identification values match their closed forms") {
  CHECK(identification_value(FunctionalSpec::mean(), 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(identification_value(FunctionalSpec::mean(), -1.0, -1.0) == doctest::Approx(0.0));
  CHECK(identification_value(FunctionalSpec::second_moment(), 4.0, -2.0) ==
        doctest::Approx(0.0));
  CHECK(identification_value(FunctionalSpec::second_moment(), 5.0, 2.0) ==
        doctest::Approx(1.0));

  // strict indicator: y = z does not count as y < z
  CHECK(identification_value(FunctionalSpec::quantile(0.5), 1.0, 1.0) ==
        doctest::Approx(-0.5));
  CHECK(identification_value(FunctionalSpec::quantile(0.25), 1.0, 0.5) ==
        doctest::Approx(0.75));

  // expectile: weight 2|tau - 1{y > z}| on (z - y)
  CHECK(identification_value(FunctionalSpec::expectile(0.25), 1.0, 3.0) ==
        doctest::Approx(-3.0));
  CHECK(identification_value(FunctionalSpec::expectile(0.25), 3.0, 1.0) ==
        doctest::Approx(1.0));
}

TEST_CASE("levels must lie strictly inside the unit interval") {
  CHECK_THROWS_AS(FunctionalSpec::quantile(0.0), InvalidSpec);
  CHECK_THROWS_AS(FunctionalSpec::quantile(1.0), InvalidSpec);
  CHECK_THROWS_AS(FunctionalSpec::expectile(-0.1), InvalidSpec);
  CHECK_THROWS_AS(FunctionalSpec::expectile(1.5), InvalidSpec);
  CHECK_NOTHROW(FunctionalSpec::quantile(0.01));
  CHECK_NOTHROW(FunctionalSpec::expectile(0.99));
}

TEST_CASE("identification functions are non-decreasing in the prediction") {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  std::vector<FunctionalSpec> specs = {
      FunctionalSpec::mean(), FunctionalSpec::second_moment(),
      FunctionalSpec::quantile(0.3), FunctionalSpec::expectile(0.7)};
  for (const auto& spec : specs) {
    for (int i = 0; i < 1000; ++i) {
      double y = unif(rng);
      double z1 = unif(rng), z2 = unif(rng);
      if (z1 > z2) std::swap(z1, z2);
      CHECK(identification_value(spec, z1, y) <=
            identification_value(spec, z2, y) + 1e-15);
    }
  }
}

TEST_CASE("discrete distributions sort and merge atoms") {
  DiscreteDistribution p({2.0, 0.0, 2.0}, {0.25, 0.5, 0.25});
  REQUIRE(p.atoms().size() == 2);
  CHECK(p.atoms()[0].value == doctest::Approx(0.0));
  CHECK(p.atoms()[0].prob == doctest::Approx(0.5));
  CHECK(p.atoms()[1].value == doctest::Approx(2.0));
  CHECK(p.atoms()[1].prob == doctest::Approx(0.5));
  CHECK(p.min_value() == doctest::Approx(0.0));
  CHECK(p.max_value() == doctest::Approx(2.0));
}

TEST_CASE("discrete distribution construction rejects bad input") {
  CHECK_THROWS_AS(DiscreteDistribution({0.0}, {-1.0}), InvalidSpec);
  CHECK_THROWS_AS(DiscreteDistribution({0.0, 1.0}, {0.5, 0.6}), InvalidSpec);
  CHECK_THROWS_AS(DiscreteDistribution({0.0}, {0.5, 0.5}), DimensionMismatch);
  CHECK_THROWS_AS(
      DiscreteDistribution({std::nan(""), 1.0}, {0.5, 0.5}), NonFiniteValue);
  CHECK_THROWS_AS(DiscreteDistribution({}, {}), EmptyInput);
}

TEST_CASE("mean identification averages V against the distribution") {
  DiscreteDistribution p({0.0, 1.0}, {0.5, 0.5});
  CHECK(mean_identification(FunctionalSpec::mean(), 0.5, p) == doctest::Approx(0.0));
  CHECK(mean_identification(FunctionalSpec::quantile(0.5), 0.5, p) ==
        doctest::Approx(0.0));
  DiscreteDistribution q({-1.0, 1.0}, {0.5, 0.5});
  CHECK(mean_identification(FunctionalSpec::second_moment(), 1.0, q) ==
        doctest::Approx(0.0));
}

TEST_CASE("functional intervals on two-point distributions") {
  DiscreteDistribution p({0.0, 1.0}, {0.5, 0.5});

  auto mean = functional_interval(FunctionalSpec::mean(), p);
  CHECK(mean.lower == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(mean.upper == doctest::Approx(0.5).epsilon(1e-9));

  // the median of a 50/50 split is the whole closed gap between the atoms
  auto med = functional_interval(FunctionalSpec::quantile(0.5), p);
  CHECK(med.lower == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(med.upper == doctest::Approx(1.0).epsilon(1e-8));

  auto e50 = functional_interval(FunctionalSpec::expectile(0.5), p);
  CHECK(e50.lower == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(e50.upper == doctest::Approx(0.5).epsilon(1e-8));

  // with weight 1-tau on the upper branch, tau=0.25 solves
  // 0.75(z-1) + 0.25 z = 0 at z = 0.75
  auto e25 = functional_interval(FunctionalSpec::expectile(0.25), p);
  CHECK(e25.lower == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(e25.upper == doctest::Approx(0.75).epsilon(1e-8));
}

TEST_CASE("quantile interval endpoints land on atoms") {
  DiscreteDistribution p({0.0, 1.0, 2.0}, {0.5, 0.25, 0.25});
  auto t = functional_interval(FunctionalSpec::quantile(0.5), p);
  CHECK(t.lower == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(t.upper == doctest::Approx(1.0).epsilon(1e-8));

  auto lo = functional_interval(FunctionalSpec::quantile(0.25), p);
  CHECK(lo.lower == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(lo.upper == doctest::Approx(0.0).epsilon(1e-8));

  CHECK(t.contains(0.5));
  CHECK(t.contains(1.0));
  CHECK_FALSE(t.contains(1.1));
  CHECK(t.contains(1.1, 0.2));
}

TEST_CASE("functional intervals agree with a brute-force sign scan") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  std::uniform_int_distribution<int> natoms(1, 5);
  std::vector<FunctionalSpec> specs = {
      FunctionalSpec::mean(), FunctionalSpec::second_moment(),
      FunctionalSpec::quantile(0.4), FunctionalSpec::expectile(0.6)};
  for (int rep = 0; rep < 50; ++rep) {
    int m = natoms(rng);
    std::vector<double> vals(m), probs(m);
    double tot = 0.0;
    for (int i = 0; i < m; ++i) {
      vals[i] = unif(rng);
      probs[i] = 0.1 + std::abs(unif(rng));
      tot += probs[i];
    }
    for (double& q : probs) q /= tot;
    DiscreteDistribution p(vals, probs);
    for (const auto& spec : specs) {
      auto t = functional_interval(spec, p);
      REQUIRE(t.lower <= t.upper + 1e-12);
      // scan V-bar on a grid: sign must match the interval sides
      double lo = p.min_value() - 1.0, hi = p.max_value() + 1.0;
      const int G = 400;
      for (int g = 0; g <= G; ++g) {
        double z = lo + (hi - lo) * g / G;
        double vbar = mean_identification(spec, z, p);
        if (vbar < -1e-9) CHECK(z <= t.lower + 1e-6);
        if (vbar > 1e-9) CHECK(z >= t.upper - 1e-6);
      }
    }
  }
}

TEST_CASE("elementary scores expand the indicator difference") {
  auto mean = FunctionalSpec::mean();
  CHECK(elementary_score(mean, 1.0, 2.0, 0.0) == doctest::Approx(1.0));
  CHECK(elementary_score(mean, 0.5, 2.0, 0.0) == doctest::Approx(0.5));
  CHECK(elementary_score(mean, 2.0, 2.0, 0.0) == doctest::Approx(2.0));
  // vanishes at or below the min and above the max of (z, y)
  CHECK(elementary_score(mean, 0.0, 2.0, 0.0) == doctest::Approx(0.0));
  CHECK(elementary_score(mean, 2.5, 2.0, 0.0) == doctest::Approx(0.0));
  CHECK(elementary_score(mean, 7.0, 3.0, 3.0) == doctest::Approx(0.0));

  CHECK(elementary_score(FunctionalSpec::quantile(0.5), 0.5, 0.0, 1.0) ==
        doctest::Approx(0.5));
}

TEST_CASE("elementary scores stay nonnegative except for the second moment") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  std::vector<FunctionalSpec> nonneg = {FunctionalSpec::mean(),
                                        FunctionalSpec::quantile(0.2),
                                        FunctionalSpec::expectile(0.8)};
  for (int i = 0; i < 2000; ++i) {
    double eta = unif(rng), z = unif(rng), y = unif(rng);
    for (const auto& spec : nonneg)
      CHECK(elementary_score(spec, eta, z, y) >= -1e-15);
  }
  CHECK(elementary_score(FunctionalSpec::second_moment(), -1.0, 0.0, -2.0) ==
        doctest::Approx(-5.0));
}

TEST_CASE("values inside the functional interval minimize expected score") {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::uniform_int_distribution<int> natoms(1, 5);
  std::vector<FunctionalSpec> specs = {
      FunctionalSpec::mean(), FunctionalSpec::quantile(0.3),
      FunctionalSpec::expectile(0.7), FunctionalSpec::second_moment()};
  for (int rep = 0; rep < 40; ++rep) {
    int m = natoms(rng);
    std::vector<double> vals(m), probs(m);
    double tot = 0.0;
    for (int i = 0; i < m; ++i) {
      vals[i] = unif(rng);
      probs[i] = 0.05 + std::abs(unif(rng));
      tot += probs[i];
    }
    for (double& q : probs) q /= tot;
    DiscreteDistribution p(vals, probs);
    // second moment lives on the squared scale; shift the probe window
    for (const auto& spec : specs) {
      auto tset = functional_interval(spec, p);
      double t = 0.5 * (tset.lower + tset.upper);
      double lo = std::min(p.min_value(), -10.0) - 1.0;
      double hi = std::max(p.max_value(), 10.0) + 1.0;
      for (int ge = 0; ge <= 12; ++ge) {
        double eta = lo + (hi - lo) * ge / 12;
        double at_t = 0.0;
        for (const auto& a : p.atoms())
          at_t += a.prob * elementary_score(spec, eta, t, a.value);
        for (int gz = 0; gz <= 12; ++gz) {
          double z = lo + (hi - lo) * gz / 12;
          double at_z = 0.0;
          for (const auto& a : p.atoms())
            at_z += a.prob * elementary_score(spec, eta, z, a.value);
          CHECK(at_t <= at_z + 1e-12);
        }
      }
    }
  }
}
