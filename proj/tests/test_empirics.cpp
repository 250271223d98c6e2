#include <doctest.h>

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "elicit/fit.hpp"

using namespace elicit;

namespace {

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/elicit_test_XXXXXX";
    path = mkdtemp(tmpl);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

Dataset make_data(std::initializer_list<double> xs, std::initializer_list<double> ys) {
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(xs.size()), 1);
  d.y.resize(static_cast<Eigen::Index>(ys.size()));
  Eigen::Index i = 0;
  for (double v : xs) d.x(i++, 0) = v;
  i = 0;
  for (double v : ys) d.y[i++] = v;
  return d;
}

}  // namespace

TEST_CASE("dataset loader handles schema, comments, and extras") {
  TempDir tmp;
  auto p = tmp.file("ok.csv");
  write_text(p,
             "# generated for a loader test\n"
             "x1,y,note\n"
             "0.5,1.0,7\n"
             "-1.5,2.0,8\n"
             "\n"
             "2.25,3.0,9\n");
  Dataset d = load_dataset(p);
  CHECK(d.n() == 3);
  CHECK(d.dim() == 1);
  CHECK(d.x(1, 0) == doctest::Approx(-1.5));
  CHECK(d.y[2] == doctest::Approx(3.0));
}

TEST_CASE("dataset loader reports schema and cell failures") {
  TempDir tmp;
  auto missing_y = tmp.file("no_y.csv");
  write_text(missing_y, "x1,x2\n1,2\n");
  CHECK_THROWS_WITH_AS(load_dataset(missing_y), doctest::Contains("'y'"), ParseError);

  auto gap = tmp.file("gap.csv");
  write_text(gap, "x1,x3,y\n1,2,3\n");
  CHECK_THROWS_WITH_AS(load_dataset(gap), doctest::Contains("x2"), ParseError);

  auto nan_cell = tmp.file("nan.csv");
  write_text(nan_cell, "x1,y\n1,0\n2,NaN\n");
  CHECK_THROWS_WITH_AS(load_dataset(nan_cell), doctest::Contains("row 2"), NonFiniteValue);

  auto junk = tmp.file("junk.csv");
  write_text(junk, "x1,y\n1,apple\n");
  CHECK_THROWS_WITH_AS(load_dataset(junk), doctest::Contains("column y"), ParseError);

  auto ragged = tmp.file("ragged.csv");
  write_text(ragged, "x1,y\n1,2\n3\n");
  CHECK_THROWS_AS(load_dataset(ragged), ParseError);

  auto empty = tmp.file("empty.csv");
  write_text(empty, "x1,y\n");
  CHECK_THROWS_AS(load_dataset(empty), EmptyInput);

  CHECK_THROWS_AS(load_dataset(tmp.file("does_not_exist.csv")), ParseError);
}

TEST_CASE("dataset save and load round-trips values") {
  TempDir tmp;
  Dataset d;
  d.x.resize(3, 2);
  d.x << 0.1, -0.25, 1.0 / 3.0, 2.0, -7.5, 0.0;
  d.y.resize(3);
  d.y << 1.5, -2.25, 1e-17;
  auto p = tmp.file("round.csv");
  save_dataset(d, p, {"source=test", "rows=3"});
  Dataset back = load_dataset(p);
  REQUIRE(back.n() == 3);
  REQUIRE(back.dim() == 2);
  CHECK((back.x - d.x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((back.y - d.y).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  std::ifstream in(p);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# source=test");
}

TEST_CASE("empirical risk matches the closed-form average") {
  auto d = make_data({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0});
  auto h = MixtureMeasure::lebesgue(-100.0, 100.0);
  ParamVector beta(1);
  beta[0] = 2.0;
  double r = empirical_risk(FunctionalSpec::mean(), h, ModelFamily::constant(), beta, d);
  CHECK(r == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  MixtureMeasure empty_h;
  CHECK(empirical_risk(FunctionalSpec::mean(), empty_h, ModelFamily::constant(), beta,
                       d) == 0.0);

  MixtureMeasure far;
  far.atoms.push_back({10.0, 1.0});  // outside every score support here
  CHECK(empirical_risk(FunctionalSpec::mean(), far, ModelFamily::constant(), beta, d) ==
        0.0);
}

TEST_CASE("empirical risk is exactly linear in the mixture scale") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Dataset d;
  d.x.resize(40, 1);
  d.y.resize(40);
  for (int i = 0; i < 40; ++i) {
    d.x(i, 0) = gauss(rng);
    d.y[i] = gauss(rng);
  }
  MixtureMeasure h;
  h.atoms = {{-0.5, 0.3}, {0.7, 1.1}};
  h.segments = {{-2.0, 2.0, 0.8}};
  MixtureMeasure h2 = h;
  for (auto& a : h2.atoms) a.weight *= 2.0;
  for (auto& s : h2.segments) s.density *= 2.0;
  ParamVector beta(2);
  beta << 0.2, 0.9;
  auto fam = ModelFamily::linear_with_intercept(1);
  for (auto spec : {FunctionalSpec::mean(), FunctionalSpec::expectile(0.35)}) {
    double base = empirical_risk(spec, h, fam, beta, d);
    double twice = empirical_risk(spec, h2, fam, beta, d);
    CHECK(twice == 2.0 * base);  // doubling every weight doubles every term exactly
  }
}

TEST_CASE("mean fit on a constant family recovers the sample mean") {
  auto d = make_data({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0});
  auto h = MixtureMeasure::lebesgue(-100.0, 100.0);
  auto r = fit(FunctionalSpec::mean(), h, ModelFamily::constant(), d);
  CHECK(r.beta[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.converged);
  CHECK(r.evaluations > 0);
}

TEST_CASE("median fit reports a flat optimum as an interval") {
  auto d = make_data({0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 10.0, 10.0});
  auto h = MixtureMeasure::lebesgue(-100.0, 100.0);
  auto r = fit(FunctionalSpec::quantile(0.5), h, ModelFamily::constant(), d);
  CHECK(r.objective == doctest::Approx(2.5).epsilon(1e-9));
  REQUIRE(r.minimizer_interval.has_value());
  CHECK(r.minimizer_interval->first == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(r.minimizer_interval->second == doctest::Approx(10.0).epsilon(1e-3));
  CHECK(r.beta[0] >= r.minimizer_interval->first - 1e-9);
  CHECK(r.beta[0] <= r.minimizer_interval->second + 1e-9);

  // with three equal low values the pinball optimum is the unique point 0
  auto d2 = make_data({0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 10.0});
  auto r2 = fit(FunctionalSpec::quantile(0.5), h, ModelFamily::constant(), d2);
  CHECK(std::abs(r2.beta[0]) < 1e-3);
  CHECK(r2.objective == doctest::Approx(1.25).epsilon(1e-3));
  CHECK_FALSE(r2.minimizer_interval.has_value());
}

TEST_CASE("noise-free line is recovered exactly by the mean fit") {
  auto d = make_data({-1.0, 0.0, 1.0}, {-1.0, 1.0, 3.0});  // y = 1 + 2x
  auto h = MixtureMeasure::lebesgue(-100.0, 100.0);
  auto r = fit(FunctionalSpec::mean(), h, ModelFamily::linear_with_intercept(1), d);
  CHECK(r.beta[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.beta[1] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("mean fit agrees with the normal equations") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss;
  Dataset d;
  const int n = 60;
  d.x.resize(n, 2);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = gauss(rng);
    d.x(i, 1) = gauss(rng);
    d.y[i] = 1.0 + 2.0 * d.x(i, 0) - d.x(i, 1) + 0.3 * gauss(rng);
  }
  Eigen::MatrixXd design(n, 3);
  design.col(0).setOnes();
  design.col(1) = d.x.col(0);
  design.col(2) = d.x.col(1);
  Eigen::Vector3d ls =
      (design.transpose() * design).ldlt().solve(design.transpose() * d.y);

  auto h = MixtureMeasure::lebesgue(-100.0, 100.0);
  auto r = fit(FunctionalSpec::mean(), h, ModelFamily::linear_with_intercept(2), d);
  CHECK((r.beta - ls).cwiseAbs().maxCoeff() < 1e-5);
  // reported objective is the risk re-evaluated at the reported point
  CHECK(r.objective ==
        doctest::Approx(empirical_risk(FunctionalSpec::mean(), h,
                                       ModelFamily::linear_with_intercept(2), r.beta, d))
            .epsilon(1e-12));
}

TEST_CASE("search boxes respect declared bounds or fail fast") {
  auto d = make_data({0.0, 0.0}, {1.0, 2.0});
  auto fam = ModelFamily::constant();
  fam.bounds = {{5.0, 5.5}};
  auto h = MixtureMeasure::lebesgue(-100.0, 100.0);
  auto r = fit(FunctionalSpec::mean(), h, fam, d);  // optimum clamps into the box
  CHECK(r.beta[0] >= 5.0);
  CHECK(r.beta[0] <= 5.5);

  OptimizerConfig opt;
  opt.search_box = {{10.0, 20.0}};  // disjoint from the declared bounds
  CHECK_THROWS_AS(fit(FunctionalSpec::mean(), h, fam, d, opt), NoFeasibleStart);
  opt.search_box = {{0.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(fit(FunctionalSpec::mean(), h, ModelFamily::constant(), d, opt),
                  DimensionMismatch);
}

TEST_CASE("elementary fit of a constant is the exact sweep optimum") {
  auto d = make_data({0.0, 0.0}, {0.0, 2.0});
  auto fam = ModelFamily::constant();

  // eta below the mean: any c >= eta attains (1/2)(eta - ybar) + const
  auto lowr = fit_elementary(FunctionalSpec::mean(), 0.5, fam, d);
  CHECK(lowr.objective == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(lowr.beta[0] == doctest::Approx(1.0));  // least-squares point of the plateau
  CHECK_FALSE(lowr.minimizer_interval.has_value());  // half-line, not an interval

  // eta above the mean: any c < eta is optimal
  auto highr = fit_elementary(FunctionalSpec::mean(), 1.5, fam, d);
  CHECK(highr.objective == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(highr.beta[0] == doctest::Approx(1.0));
  CHECK_FALSE(highr.minimizer_interval.has_value());
}

TEST_CASE("elementary fit reports interior plateaus for slope-only lines") {
  // z_i = b x_i: sample enters at b = eta/x_i; chosen so the optimum is the
  // bounded cell [1, 2) with exact objective 0
  auto d = make_data({2.0, 1.0}, {3.0, 0.5});
  auto fam = ModelFamily::linear_no_intercept(1);
  auto r = fit_elementary(FunctionalSpec::mean(), 2.0, fam, d);
  CHECK(r.objective == doctest::Approx(0.0));
  REQUIRE(r.minimizer_interval.has_value());
  CHECK(r.minimizer_interval->first == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.minimizer_interval->second == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.beta[0] == doctest::Approx(1.3));  // least squares 6.5/5 inside the cell
}

TEST_CASE("elementary sweep never loses to a dense scan") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int rep = 0; rep < 30; ++rep) {
    Dataset d;
    int n = 3 + static_cast<int>(rng() % 8);
    d.x.resize(n, 1);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
      d.x(i, 0) = gauss(rng);
      d.y[i] = gauss(rng);
    }
    double eta = unif(rng);
    auto spec = (rep % 2) ? FunctionalSpec::mean() : FunctionalSpec::quantile(0.3);
    OptimizerConfig opt;
    opt.search_box = {{-5.0, 5.0}};  // scan below compares inside this box
    for (auto fam : {ModelFamily::constant(), ModelFamily::linear_no_intercept(1)}) {
      auto r = fit_elementary(spec, eta, fam, d, opt);
      ParamVector p(1);
      for (int g = 0; g <= 200; ++g) {
        p[0] = -5.0 + 10.0 * g / 200;
        CHECK(r.objective <= elementary_risk(spec, eta, fam, p, d) + 1e-12);
      }
    }
  }
}

TEST_CASE("affine elementary fits on an exact line return that line") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss;
  Dataset d;
  const int n = 4000;
  d.x.resize(n, 1);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = gauss(rng);
    d.y[i] = 1.0 + 2.0 * d.x(i, 0);
  }
  auto fam = ModelFamily::linear_with_intercept(1);
  for (double eta : {-1.0, 0.4, 1.0, 2.5}) {
    auto r = fit_elementary(FunctionalSpec::mean(), eta, fam, d);
    CHECK(r.objective <= 1e-9);
    CHECK(r.beta[0] == doctest::Approx(1.0).epsilon(0.02));
    CHECK(r.beta[1] == doctest::Approx(2.0).epsilon(0.02));
  }
}

TEST_CASE("affine elementary fit objective is the exact risk at the answer") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  Dataset d;
  const int n = 800;
  d.x.resize(n, 1);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = gauss(rng);
    d.y[i] = d.x(i, 0) * d.x(i, 0) + gauss(rng);
  }
  auto fam = ModelFamily::linear_with_intercept(1);
  for (double eta : {0.5, 1.5}) {
    auto r = fit_elementary(FunctionalSpec::mean(), eta, fam, d);
    CHECK(r.objective ==
          doctest::Approx(elementary_risk(FunctionalSpec::mean(), eta, fam, r.beta, d))
              .epsilon(1e-12));
  }
}
