// Command-line front end: datasets in, CSV/JSON analyses out, optional SVG
// plots. Exit codes: 0 success, 1 computation error, 2 parse/config error,
// 3 calibration check failed.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elicit/calibration.hpp"
#include "elicit/io.hpp"
#include "elicit/svg.hpp"
#include "elicit/synthetic.hpp"

using nlohmann::json;
using namespace elicit;

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    config_fail("cannot parse number '" + s + "' in " + what);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// ---------- functional / model string forms ----------

FunctionalSpec parse_functional(const std::string& s) {
  if (s == "mean") return FunctionalSpec::mean();
  if (s == "moment2") return FunctionalSpec::second_moment();
  auto parts = split(s, ':');
  if (parts.size() == 2 && parts[0] == "quantile")
    return FunctionalSpec::quantile(to_double(parts[1], "--functional"));
  if (parts.size() == 2 && parts[0] == "expectile")
    return FunctionalSpec::expectile(to_double(parts[1], "--functional"));
  config_fail("unknown functional '" + s +
              "' (expected mean, quantile:a, expectile:t, or moment2)");
}

std::string functional_to_string(const FunctionalSpec& spec) {
  switch (spec.kind) {
    case FunctionalKind::Mean: return "mean";
    case FunctionalKind::SecondMoment: return "moment2";
    case FunctionalKind::Quantile: return "quantile:" + format_double(spec.level);
    case FunctionalKind::Expectile: return "expectile:" + format_double(spec.level);
  }
  return {};
}

ModelFamily parse_model(const std::string& s, int data_dim) {
  auto parts = split(s, ':');
  int dim = data_dim;
  if (parts.size() == 2) {
    try {
      dim = std::stoi(parts[1]);
    } catch (const std::exception&) {
      config_fail("bad model dimension in '" + s + "'");
    }
  } else if (parts.size() != 1) {
    config_fail("unknown model '" + s + "'");
  }
  if (parts[0] == "constant") return ModelFamily::constant();
  if (parts[0] == "linear0") return ModelFamily::linear_no_intercept(dim);
  if (parts[0] == "linear") return ModelFamily::linear_with_intercept(dim);
  config_fail("unknown model '" + s +
              "' (expected constant, linear0[:d], or linear[:d])");
}

std::string model_to_string(const ModelFamily& fam) {
  switch (fam.kind) {
    case ModelKind::Constant: return "constant";
    case ModelKind::LinearNoIntercept: return "linear0:" + std::to_string(fam.dim);
    case ModelKind::LinearWithIntercept: return "linear:" + std::to_string(fam.dim);
  }
  return {};
}

GeneratorKind parse_example(const std::string& s) {
  if (s == "quadratic") return GeneratorKind::Quadratic;
  if (s == "logistic") return GeneratorKind::Logistic;
  if (s == "cubic") return GeneratorKind::Cubic;
  config_fail("unknown example '" + s +
              "' (expected quadratic, logistic, or cubic)");
}

std::string example_to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Quadratic: return "quadratic";
    case GeneratorKind::Logistic: return "logistic";
    case GeneratorKind::Cubic: return "cubic";
  }
  return {};
}

// ---------- grids, betas, mixtures ----------

std::vector<double> parse_eta_values(const std::string& s) {
  if (s.empty()) config_fail("empty eta grid");
  if (s.find(':') != std::string::npos) {
    auto parts = split(s, ':');
    if (parts.size() != 3) config_fail("eta grid must be lo:hi:step");
    double lo = to_double(parts[0], "--eta-grid");
    double hi = to_double(parts[1], "--eta-grid");
    double step = to_double(parts[2], "--eta-grid");
    if (!(step > 0.0)) config_fail("eta grid step must be > 0");
    if (hi < lo) config_fail("eta grid needs hi >= lo");
    long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> out;
    for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(to_double(tok, "--eta-grid"));
  return out;
}

ParamVector parse_beta(const std::string& s) {
  auto toks = split(s, ',');
  ParamVector beta(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t i = 0; i < toks.size(); ++i)
    beta[static_cast<Eigen::Index>(i)] = to_double(toks[i], "--beta");
  return beta;
}

MixtureMeasure mixture_from_json(const json& j) {
  MixtureMeasure m;
  try {
    if (j.contains("atoms"))
      for (const auto& a : j.at("atoms"))
        m.atoms.push_back({a.at("eta").get<double>(), a.at("weight").get<double>()});
    if (j.contains("segments"))
      for (const auto& s : j.at("segments"))
        m.segments.push_back({s.at("lo").get<double>(), s.at("hi").get<double>(),
                              s.at("density").get<double>()});
  } catch (const json::exception& e) {
    config_fail(std::string("bad mixture config: ") + e.what());
  }
  m.validate();
  return m;
}

json mixture_to_json(const MixtureMeasure& m) {
  json j;
  j["atoms"] = json::array();
  for (const auto& a : m.atoms) j["atoms"].push_back({{"eta", a.eta}, {"weight", a.weight}});
  j["segments"] = json::array();
  for (const auto& s : m.segments)
    j["segments"].push_back({{"lo", s.lo}, {"hi", s.hi}, {"density", s.density}});
  return j;
}

// Wide enough that no reachable prediction truncates the mixture integral.
MixtureMeasure default_mixture(const Dataset& data) {
  double mx = data.x.size() > 0 ? data.x.cwiseAbs().maxCoeff() : 0.0;
  double my = data.y.cwiseAbs().maxCoeff();
  double r = 3.0 * std::max({1.0, my, mx});
  double m = r * (1.0 + mx) + my + 1.0;
  return MixtureMeasure::lebesgue(-m, m);
}

OptimizerConfig optimizer_from_json(const json& cfg) {
  OptimizerConfig o;
  if (!cfg.contains("optimizer")) return o;
  const json& j = cfg.at("optimizer");
  try {
    if (j.contains("starts")) o.starts = j.at("starts").get<int>();
    if (j.contains("xtol")) o.xtol = j.at("xtol").get<double>();
    if (j.contains("ftol_flag")) o.ftol_flag = j.at("ftol_flag").get<double>();
    if (j.contains("grid")) o.grid = j.at("grid").get<int>();
    if (j.contains("max_iter")) o.max_iter = j.at("max_iter").get<int>();
    if (j.contains("search_box")) {
      std::vector<std::pair<double, double>> box;
      for (const auto& b : j.at("search_box"))
        box.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
      o.search_box = std::move(box);
    }
  } catch (const json::exception& e) {
    config_fail(std::string("bad optimizer config: ") + e.what());
  }
  return o;
}

json optimizer_to_json(const OptimizerConfig& o) {
  json j{{"starts", o.starts}, {"xtol", o.xtol},     {"ftol_flag", o.ftol_flag},
         {"grid", o.grid},     {"max_iter", o.max_iter}};
  if (o.search_box) {
    json box = json::array();
    for (const auto& b : *o.search_box) box.push_back({b.first, b.second});
    j["search_box"] = box;
  }
  return j;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) config_fail("cannot open config file '" + path + "'");
  try {
    json j;
    in >> j;
    if (!j.is_object()) config_fail("config root must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    config_fail("config file '" + path + "': " + e.what());
  }
}

// ---------- flag bookkeeping ----------

struct Cmd {
  CLI::App* app = nullptr;

  std::string config, data, functional, model, beta, eta_grid, out, svg, csv;
  std::string candidates, grid, example;
  std::uint64_t seed = 0;
  long n = 1000;
  double noise_sd = 0.5, tol = 0.0, z = 3.0;
  int bins = 10, refinement = 1;
  bool equal_width = false;

  std::map<std::string, CLI::Option*> opts;
  bool set(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

template <class T>
void merge_key(const Cmd& c, const std::string& name, const json& cfg,
               T& slot) {
  if (c.set(name) || !cfg.contains(name)) return;
  try {
    slot = cfg.at(name).get<T>();
  } catch (const json::exception& e) {
    config_fail("config key '" + name + "': " + e.what());
  }
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty())
    config_fail("missing required " + flag + " (flag or config key)");
}

std::vector<double> effective_etas(const Cmd& c, const json& cfg) {
  if (c.set("eta_grid") || !cfg.contains("eta_grid"))
    return parse_eta_values(c.eta_grid);
  const json& j = cfg.at("eta_grid");
  if (j.is_string()) return parse_eta_values(j.get<std::string>());
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    if (out.empty()) config_fail("config eta_grid is empty");
    return out;
  }
  config_fail("config eta_grid must be a string or an array of numbers");
}

ParamVector effective_beta(const Cmd& c, const json& cfg) {
  if (c.set("beta") || !cfg.contains("beta")) return parse_beta(c.beta);
  const json& j = cfg.at("beta");
  if (j.is_string()) return parse_beta(j.get<std::string>());
  if (j.is_array()) {
    ParamVector beta(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
      beta[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
    return beta;
  }
  config_fail("config beta must be a string or an array of numbers");
}

// ---------- output ----------

std::string meta_header(const std::string& cmd, const json& echo) {
  return "# elicit " + cmd + "\n# config " + echo.dump() + "\n";
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    write_file_atomic(path, content);
}

json beta_to_json(const ParamVector& beta) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < beta.size(); ++i) arr.push_back(beta[i]);
  return arr;
}

std::string sanitize_cell(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

// ---------- candidate sources for `pareto` ----------

std::vector<ParamVector> read_candidates(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open candidates file '" + path + "'");
  std::string line;
  std::vector<int> beta_cols;
  long row = 0;
  std::vector<ParamVector> out;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!header_done) {
      for (int k = 0;; ++k) {
        std::string want = "beta" + std::to_string(k);
        auto it = std::find(cells.begin(), cells.end(), want);
        if (it == cells.end()) break;
        beta_cols.push_back(static_cast<int>(it - cells.begin()));
      }
      if (beta_cols.empty())
        throw ParseError("candidates file '" + path + "' has no beta0 column");
      if (static_cast<int>(beta_cols.size()) != dim)
        config_fail("candidates have " + std::to_string(beta_cols.size()) +
                    " parameters but the model needs " + std::to_string(dim));
      header_done = true;
      continue;
    }
    ParamVector beta(dim);
    bool complete = true;
    for (int k = 0; k < dim; ++k) {
      auto col = static_cast<std::size_t>(beta_cols[static_cast<std::size_t>(k)]);
      if (col >= cells.size() || cells[col].empty()) {
        complete = false;  // e.g. a failed scan row
        break;
      }
      try {
        beta[k] = std::stod(cells[col]);
      } catch (const std::exception&) {
        throw ParseError("candidates file '" + path + "' row " +
                         std::to_string(row) + ": bad number '" + cells[col] + "'");
      }
    }
    if (complete) out.push_back(std::move(beta));
  }
  if (out.empty()) throw EmptyInput("candidates file '" + path + "' has no usable rows");
  return out;
}

std::vector<ParamVector> grid_candidates(const std::string& s, int dim) {
  std::map<int, std::vector<double>> axes;
  for (const auto& tok : split(s, ',')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || tok.empty() || tok[0] != 'b')
      config_fail("candidate grid must look like b0=lo:hi:step,b1=lo:hi:step");
    int idx;
    try {
      idx = std::stoi(tok.substr(1, eq - 1));
    } catch (const std::exception&) {
      config_fail("bad parameter name '" + tok.substr(0, eq) + "' in candidate grid");
    }
    axes[idx] = parse_eta_values(tok.substr(eq + 1));
  }
  if (static_cast<int>(axes.size()) != dim)
    config_fail("candidate grid covers " + std::to_string(axes.size()) +
                " parameters but the model needs " + std::to_string(dim));
  for (int k = 0; k < dim; ++k)
    if (!axes.count(k)) config_fail("candidate grid is missing b" + std::to_string(k));

  std::vector<ParamVector> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  for (;;) {
    ParamVector beta(dim);
    for (int k = 0; k < dim; ++k)
      beta[k] = axes[k][idx[static_cast<std::size_t>(k)]];
    out.push_back(std::move(beta));
    int k = dim - 1;  // last axis varies fastest
    for (; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < axes[k].size()) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

// ---------- commands ----------

int cmd_simulate(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "example", cfg, c.example);
  merge_key(c, "n", cfg, c.n);
  merge_key(c, "seed", cfg, c.seed);
  merge_key(c, "out", cfg, c.out);
  require(c.example, "--example");
  require(c.out, "--out");

  GeneratorSpec g;
  g.kind = parse_example(c.example);
  g.n = c.n;
  g.seed = c.seed;
  if (c.set("noise_sd"))
    g.noise_sd = c.noise_sd;
  else if (cfg.contains("noise_sd"))
    g.noise_sd = cfg.at("noise_sd").get<double>();

  json echo{{"example", example_to_string(g.kind)}, {"n", g.n}, {"seed", g.seed}};
  if (g.noise_sd) echo["noise_sd"] = *g.noise_sd;

  Dataset d = generate(g);
  save_dataset(d, c.out, {"elicit simulate", "config " + echo.dump()});
  return 0;
}

int cmd_murphy(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "data", cfg, c.data);
  merge_key(c, "functional", cfg, c.functional);
  merge_key(c, "model", cfg, c.model);
  merge_key(c, "refinement", cfg, c.refinement);
  require(c.data, "--data");
  require(c.functional, "--functional");
  require(c.model, "--model");
  if (!c.set("beta") && !cfg.contains("beta")) config_fail("missing required --beta");

  Dataset d = load_dataset(c.data);
  FunctionalSpec spec = parse_functional(c.functional);
  ModelFamily fam = parse_model(c.model, static_cast<int>(d.dim()));
  ParamVector beta = effective_beta(c, cfg);
  if (beta.size() != fam.param_dim())
    config_fail("--beta has " + std::to_string(beta.size()) +
                " entries but the model needs " + std::to_string(fam.param_dim()));

  Eigen::VectorXd preds = predict_all(fam, beta, d);
  MurphyCurve curve = murphy_curve(spec, preds, d.y, c.refinement);

  json echo{{"beta", beta_to_json(beta)},
            {"data", c.data},
            {"functional", functional_to_string(spec)},
            {"model", model_to_string(fam)},
            {"refinement", c.refinement}};
  std::string outs = meta_header("murphy", echo) + "eta,value,value_right\n";
  for (Eigen::Index i = 0; i < curve.knots.size(); ++i)
    outs += format_double(curve.knots[i]) + "," + format_double(curve.value_at[i]) +
            "," + format_double(curve.value_right[i]) + "\n";
  emit(c.out, outs);

  if (!c.svg.empty()) {
    svg::Series s;
    s.x.assign(curve.knots.data(), curve.knots.data() + curve.knots.size());
    s.y.assign(curve.value_at.data(), curve.value_at.data() + curve.value_at.size());
    s.label = "mean elementary score";
    write_file_atomic(c.svg, svg::line_plot({s}, "Murphy curve", "eta", "score"));
  }
  return 0;
}

int cmd_fit(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "data", cfg, c.data);
  merge_key(c, "functional", cfg, c.functional);
  merge_key(c, "model", cfg, c.model);
  require(c.data, "--data");
  require(c.functional, "--functional");
  require(c.model, "--model");

  Dataset d = load_dataset(c.data);
  FunctionalSpec spec = parse_functional(c.functional);
  ModelFamily fam = parse_model(c.model, static_cast<int>(d.dim()));
  MixtureMeasure h = cfg.contains("mixture") ? mixture_from_json(cfg.at("mixture"))
                                             : default_mixture(d);
  OptimizerConfig opt = optimizer_from_json(cfg);

  FitResult r = fit(spec, h, fam, d, opt);

  json echo{{"data", c.data},
            {"functional", functional_to_string(spec)},
            {"mixture", mixture_to_json(h)},
            {"model", model_to_string(fam)},
            {"optimizer", optimizer_to_json(opt)}};
  json result{{"beta", beta_to_json(r.beta)},
              {"objective", r.objective},
              {"evaluations", r.evaluations},
              {"converged", r.converged}};
  result["minimizer_interval"] =
      r.minimizer_interval
          ? json::array({r.minimizer_interval->first, r.minimizer_interval->second})
          : json();
  json out{{"command", "fit"}, {"config", echo}, {"result", result}};
  emit(c.out, out.dump(2) + "\n");
  return 0;
}

int cmd_scan(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "data", cfg, c.data);
  merge_key(c, "functional", cfg, c.functional);
  merge_key(c, "model", cfg, c.model);
  require(c.data, "--data");
  require(c.functional, "--functional");
  require(c.model, "--model");
  if (!c.set("eta_grid") && !cfg.contains("eta_grid"))
    config_fail("missing required --eta-grid");

  Dataset d = load_dataset(c.data);
  FunctionalSpec spec = parse_functional(c.functional);
  ModelFamily fam = parse_model(c.model, static_cast<int>(d.dim()));
  std::vector<double> etas = effective_etas(c, cfg);
  OptimizerConfig opt = optimizer_from_json(cfg);

  auto entries = eta_scan(spec, fam, d, etas, opt);

  json echo{{"data", c.data},
            {"eta_grid", etas},
            {"functional", functional_to_string(spec)},
            {"model", model_to_string(fam)},
            {"optimizer", optimizer_to_json(opt)}};
  std::string outs = meta_header("scan", echo);
  outs += "eta,ok,objective,converged";
  for (int k = 0; k < fam.param_dim(); ++k) outs += ",beta" + std::to_string(k);
  outs += ",interval_lo,interval_hi,error\n";
  for (const auto& e : entries) {
    outs += format_double(e.eta) + "," + (e.ok ? "1" : "0") + ",";
    if (e.ok) {
      outs += format_double(e.result.objective) + "," +
              (e.result.converged ? "1" : "0");
      for (Eigen::Index k = 0; k < e.result.beta.size(); ++k)
        outs += "," + format_double(e.result.beta[k]);
      if (e.result.minimizer_interval)
        outs += "," + format_double(e.result.minimizer_interval->first) + "," +
                format_double(e.result.minimizer_interval->second);
      else
        outs += ",,";
      outs += ",";
    } else {
      outs += ",";
      for (int k = 0; k < fam.param_dim(); ++k) outs += ",";
      outs += ",,," + sanitize_cell(e.error);
    }
    outs += "\n";
  }
  emit(c.out, outs);

  if (!c.svg.empty() && fam.param_dim() >= 1) {
    svg::Series s;
    for (const auto& e : entries) {
      if (!e.ok) continue;
      s.x.push_back(e.eta);
      s.y.push_back(e.result.beta[0]);
    }
    s.label = "beta0(eta)";
    write_file_atomic(c.svg,
                      svg::line_plot({s}, "Per-threshold fit", "eta", "beta0"));
  }
  return 0;
}

int cmd_pareto(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "data", cfg, c.data);
  merge_key(c, "functional", cfg, c.functional);
  merge_key(c, "model", cfg, c.model);
  merge_key(c, "candidates", cfg, c.candidates);
  merge_key(c, "grid", cfg, c.grid);
  merge_key(c, "tolerance", cfg, c.tol);
  require(c.data, "--data");
  require(c.functional, "--functional");
  require(c.model, "--model");
  if (c.candidates.empty() && c.grid.empty())
    config_fail("provide candidates via --candidates FILE or --grid SPEC");

  Dataset d = load_dataset(c.data);
  FunctionalSpec spec = parse_functional(c.functional);
  ModelFamily fam = parse_model(c.model, static_cast<int>(d.dim()));

  std::vector<ParamVector> cands =
      !c.candidates.empty() ? read_candidates(c.candidates, fam.param_dim())
                            : grid_candidates(c.grid, fam.param_dim());

  std::vector<MurphyCurve> curves;
  curves.reserve(cands.size());
  for (const auto& beta : cands)
    curves.push_back(murphy_curve(spec, predict_all(fam, beta, d), d.y, 0));
  auto entries = pareto_filter(curves, c.tol);

  json echo{{"data", c.data},
            {"functional", functional_to_string(spec)},
            {"model", model_to_string(fam)},
            {"tolerance", c.tol}};
  if (!c.candidates.empty())
    echo["candidates"] = c.candidates;
  else
    echo["grid"] = c.grid;

  std::string outs = meta_header("pareto", echo);
  outs += "index,optimal,dominated_by";
  for (int k = 0; k < fam.param_dim(); ++k) outs += ",beta" + std::to_string(k);
  outs += "\n";
  for (std::size_t i = 0; i < cands.size(); ++i) {
    outs += std::to_string(i) + "," + (entries[i].optimal ? "1" : "0") + "," +
            std::to_string(entries[i].dominated_by);
    for (Eigen::Index k = 0; k < cands[i].size(); ++k)
      outs += "," + format_double(cands[i][k]);
    outs += "\n";
  }
  emit(c.out, outs);

  if (!c.svg.empty()) {
    svg::Series opt_s, dom_s;
    opt_s.points_only = dom_s.points_only = true;
    opt_s.color = "#1f77b4";
    opt_s.label = "Pareto optimal";
    dom_s.color = "#b0b0b0";
    dom_s.label = "Dominated";
    for (std::size_t i = 0; i < cands.size(); ++i) {
      double x = cands[i][0];
      double y = cands[i].size() > 1 ? cands[i][1] : 0.0;
      auto& s = entries[i].optimal ? opt_s : dom_s;
      s.x.push_back(x);
      s.y.push_back(y);
    }
    write_file_atomic(
        c.svg, svg::line_plot({dom_s, opt_s}, "Dominance-filtered parameters",
                              "beta0", cands[0].size() > 1 ? "beta1" : ""));
  }
  return 0;
}

int cmd_calibrate(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "data", cfg, c.data);
  merge_key(c, "functional", cfg, c.functional);
  merge_key(c, "model", cfg, c.model);
  merge_key(c, "bins", cfg, c.bins);
  merge_key(c, "z_threshold", cfg, c.z);
  merge_key(c, "equal_width", cfg, c.equal_width);
  require(c.data, "--data");
  require(c.functional, "--functional");
  require(c.model, "--model");
  bool have_beta = c.set("beta") || cfg.contains("beta");
  bool have_grid = c.set("eta_grid") || cfg.contains("eta_grid");
  if (!have_beta && !have_grid)
    config_fail("provide --beta for a direct check or --eta-grid for the harness");

  Dataset d = load_dataset(c.data);
  FunctionalSpec spec = parse_functional(c.functional);
  ModelFamily fam = parse_model(c.model, static_cast<int>(d.dim()));
  BinningMode mode = c.equal_width ? BinningMode::EqualWidth : BinningMode::EqualCount;

  json echo{{"bins", c.bins},
            {"data", c.data},
            {"equal_width", c.equal_width},
            {"functional", functional_to_string(spec)},
            {"model", model_to_string(fam)},
            {"z_threshold", c.z}};

  CalibrationReport rep;
  json result;
  if (have_grid && !have_beta) {
    std::vector<double> etas = effective_etas(c, cfg);
    OptimizerConfig opt = optimizer_from_json(cfg);
    echo["eta_grid"] = etas;
    echo["optimizer"] = optimizer_to_json(opt);
    auto harness = theorem1_harness(spec, fam, d, etas, opt);
    // honor the binning flags, which the harness's embedded diagnostic
    // cannot see
    rep = calibration_diagnostic(spec, predict_all(fam, harness.consensus, d),
                                 d.y, c.bins, mode, c.z);
    rep.applicable = harness.applicable;
    result["spread"] = harness.spread;
    result["consensus"] = beta_to_json(harness.consensus);
    json per = json::array();
    for (const auto& e : harness.per_eta) {
      json je{{"eta", e.eta}, {"ok", e.ok}};
      if (e.ok) {
        je["beta"] = beta_to_json(e.result.beta);
        je["objective"] = e.result.objective;
        je["converged"] = e.result.converged;
      } else {
        je["error"] = e.error;
      }
      per.push_back(je);
    }
    result["per_eta"] = per;
  } else {
    ParamVector beta = effective_beta(c, cfg);
    if (beta.size() != fam.param_dim())
      config_fail("--beta has " + std::to_string(beta.size()) +
                  " entries but the model needs " + std::to_string(fam.param_dim()));
    echo["beta"] = beta_to_json(beta);
    rep = calibration_diagnostic(spec, predict_all(fam, beta, d), d.y, c.bins,
                                 mode, c.z);
    rep.applicable = fam.supports_shift();
  }

  result["pass"] = rep.pass;
  result["overall"] = rep.overall;
  result["z_threshold"] = rep.z_threshold;
  result["applicable"] = rep.applicable;
  json bins = json::array();
  for (const auto& b : rep.bins)
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"mean_v", b.mean_v},
                    {"mean_v_right", b.mean_v_right},
                    {"se_left", b.se_left},
                    {"se_right", b.se_right},
                    {"violation", b.violation},
                    {"pass", b.pass}});
  result["bins"] = bins;
  json out{{"command", "calibrate"}, {"config", echo}, {"result", result}};
  emit(c.out, out.dump(2) + "\n");

  std::vector<double> centers, scores;
  for (const auto& b : rep.bins) {
    centers.push_back(0.5 * (b.lo + b.hi));
    scores.push_back(b.violation);
  }
  if (!c.csv.empty()) {
    std::string csvs = meta_header("calibrate", echo) + "bin_center,standardized_mean\n";
    for (std::size_t i = 0; i < centers.size(); ++i)
      csvs += format_double(centers[i]) + "," + format_double(scores[i]) + "\n";
    write_file_atomic(c.csv, csvs);
  }
  if (!c.svg.empty())
    write_file_atomic(c.svg, svg::bar_chart(centers, scores, "Calibration check",
                                            "prediction bin center",
                                            "violation (standard errors)", c.z));
  return rep.pass ? 0 : 3;
}

int cmd_oracle(Cmd& c) {
  json cfg = load_config(c.config);
  merge_key(c, "example", cfg, c.example);
  require(c.example, "--example");
  if (!c.set("eta_grid") && !cfg.contains("eta_grid"))
    config_fail("missing required --eta-grid");

  GeneratorKind kind = parse_example(c.example);
  std::vector<double> etas = effective_etas(c, cfg);

  json echo{{"eta_grid", etas}, {"example", example_to_string(kind)}};
  std::string outs = meta_header("oracle", echo) + "eta,beta0,beta1\n";
  std::vector<double> b0s, b1s;
  for (double eta : etas) {
    switch (kind) {
      case GeneratorKind::Quadratic:
        for (double b : oracle_b_eta_quadratic(eta)) {
          outs += format_double(eta) + ",0," + format_double(b) + "\n";
          b0s.push_back(0.0);
          b1s.push_back(b);
        }
        break;
      case GeneratorKind::Logistic: {
        auto p = oracle_frontier_logistic(eta);
        outs += format_double(eta) + "," + format_double(p.first) + "," +
                format_double(p.second) + "\n";
        b0s.push_back(p.first);
        b1s.push_back(p.second);
        break;
      }
      case GeneratorKind::Cubic: {
        auto p = oracle_frontier_cubic(eta);
        outs += format_double(eta) + "," + format_double(p.first) + "," +
                format_double(p.second) + "\n";
        b0s.push_back(p.first);
        b1s.push_back(p.second);
        break;
      }
    }
  }
  emit(c.out, outs);

  if (!c.svg.empty()) {
    svg::Series s;
    s.x = b0s;
    s.y = b1s;
    s.points_only = (kind == GeneratorKind::Quadratic);
    s.label = "tangent-line frontier";
    write_file_atomic(c.svg, svg::line_plot({s}, "Optimal-parameter frontier",
                                            "beta0", "beta1"));
  }
  return 0;
}

// ---------- wiring ----------

void add_common(Cmd& c, CLI::App* sub) {
  c.app = sub;
  c.opts["config"] = sub->add_option("--config", c.config, "JSON config file; flags override");
  c.opts["out"] = sub->add_option("--out", c.out, "output file (default: stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Identification functions, elementary scores, Murphy curves, dominance "
      "filtering, and calibration diagnostics"};
  app.require_subcommand(1);

  Cmd murphy, fitc, scan, pareto, calibrate, simulate, oracle;

  {
    auto* s = app.add_subcommand("murphy", "elementary-score curve for one forecast");
    add_common(murphy, s);
    murphy.opts["data"] = s->add_option("--data", murphy.data, "dataset CSV (x1..xd,y)");
    murphy.opts["functional"] =
        s->add_option("--functional", murphy.functional,
                      "mean | quantile:a | expectile:t | moment2");
    murphy.opts["model"] = s->add_option("--model", murphy.model,
                                         "constant | linear0[:d] | linear[:d]");
    murphy.opts["beta"] = s->add_option("--beta", murphy.beta, "model parameters, comma separated");
    murphy.opts["refinement"] =
        s->add_option("--refinement", murphy.refinement, "extra knots per gap (default 1)");
    murphy.opts["svg"] = s->add_option("--svg", murphy.svg, "also render an SVG plot");
  }
  {
    auto* s = app.add_subcommand("fit", "minimize a mixture loss over a model family");
    add_common(fitc, s);
    fitc.opts["data"] = s->add_option("--data", fitc.data, "dataset CSV");
    fitc.opts["functional"] = s->add_option("--functional", fitc.functional, "functional spec");
    fitc.opts["model"] = s->add_option("--model", fitc.model, "model family");
  }
  {
    auto* s = app.add_subcommand("scan", "per-threshold elementary-risk minimizers");
    add_common(scan, s);
    scan.opts["data"] = s->add_option("--data", scan.data, "dataset CSV");
    scan.opts["functional"] = s->add_option("--functional", scan.functional, "functional spec");
    scan.opts["model"] = s->add_option("--model", scan.model, "model family");
    scan.opts["eta_grid"] =
        s->add_option("--eta-grid", scan.eta_grid, "thresholds, lo:hi:step or comma list");
    scan.opts["svg"] = s->add_option("--svg", scan.svg, "also render an SVG plot");
  }
  {
    auto* s = app.add_subcommand("pareto", "dominance-filter candidate parameters");
    add_common(pareto, s);
    pareto.opts["data"] = s->add_option("--data", pareto.data, "dataset CSV");
    pareto.opts["functional"] = s->add_option("--functional", pareto.functional, "functional spec");
    pareto.opts["model"] = s->add_option("--model", pareto.model, "model family");
    pareto.opts["candidates"] =
        s->add_option("--candidates", pareto.candidates,
                      "CSV with beta0.. columns (e.g. a scan output)");
    pareto.opts["grid"] = s->add_option(
        "--grid", pareto.grid, "candidate lattice, e.g. b0=-1:1:0.5,b1=0:2:0.5");
    pareto.opts["tolerance"] =
        s->add_option("--tol", pareto.tol, "dominance tolerance (default 0)");
    pareto.opts["svg"] = s->add_option("--svg", pareto.svg, "scatter plot of the verdicts");
  }
  {
    auto* s = app.add_subcommand("calibrate", "binned identification-value diagnostic");
    add_common(calibrate, s);
    calibrate.opts["data"] = s->add_option("--data", calibrate.data, "dataset CSV");
    calibrate.opts["functional"] =
        s->add_option("--functional", calibrate.functional, "functional spec");
    calibrate.opts["model"] = s->add_option("--model", calibrate.model, "model family");
    calibrate.opts["beta"] =
        s->add_option("--beta", calibrate.beta, "parameters of the forecast to check");
    calibrate.opts["eta_grid"] = s->add_option(
        "--eta-grid", calibrate.eta_grid,
        "run the per-threshold harness over these thresholds instead of --beta");
    calibrate.opts["bins"] = s->add_option("--bins", calibrate.bins, "bin count (default 10)");
    calibrate.opts["z_threshold"] =
        s->add_option("--z", calibrate.z, "violation threshold in standard errors (default 3)");
    calibrate.opts["equal_width"] = s->add_flag("--equal-width", calibrate.equal_width,
                                                "equal-width bins instead of equal-count");
    calibrate.opts["csv"] =
        s->add_option("--csv", calibrate.csv, "also write bin_center,standardized_mean CSV");
    calibrate.opts["svg"] = s->add_option("--svg", calibrate.svg, "bar chart of bin violations");
  }
  {
    auto* s = app.add_subcommand("simulate", "write a synthetic dataset CSV");
    add_common(simulate, s);
    simulate.opts["example"] =
        s->add_option("--example", simulate.example, "quadratic | logistic | cubic");
    simulate.opts["n"] = s->add_option("--n", simulate.n, "sample size (default 1000)");
    simulate.opts["seed"] = s->add_option("--seed", simulate.seed, "RNG seed (default 0)");
    simulate.opts["noise_sd"] =
        s->add_option("--noise-sd", simulate.noise_sd,
                      "noise standard deviation (quadratic always uses 1)");
  }
  {
    auto* s = app.add_subcommand("oracle", "closed-form optimal parameters per threshold");
    add_common(oracle, s);
    oracle.opts["example"] =
        s->add_option("--example", oracle.example, "quadratic | logistic | cubic");
    oracle.opts["eta_grid"] =
        s->add_option("--eta-grid", oracle.eta_grid, "thresholds, lo:hi:step or comma list");
    oracle.opts["svg"] = s->add_option("--svg", oracle.svg, "frontier plot");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  CLI::App* sub = app.get_subcommands().at(0);
  try {
    if (sub == murphy.app) return cmd_murphy(murphy);
    if (sub == fitc.app) return cmd_fit(fitc);
    if (sub == scan.app) return cmd_scan(scan);
    if (sub == pareto.app) return cmd_pareto(pareto);
    if (sub == calibrate.app) return cmd_calibrate(calibrate);
    if (sub == simulate.app) return cmd_simulate(simulate);
    if (sub == oracle.app) return cmd_oracle(oracle);
    std::cerr << "error: unknown command\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n\n" << sub->help() << std::flush;
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
