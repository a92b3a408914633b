#pragma once

#include <json.hpp>

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdoe/criteria.hpp"
#include "fdoe/errors.hpp"
#include "fdoe/formula.hpp"
#include "fdoe/model.hpp"
#include "fdoe/optimizer.hpp"
#include "fdoe/priors.hpp"

namespace fdoe {

enum class ApproxMethod { quadrature, mc };

inline const char* to_string(ApproxMethod m) {
  return m == ApproxMethod::quadrature ? "quadrature" : "MC";
}

inline std::pair<const char*, const char*> family_link_names(GlmFamily family) {
  return family == GlmFamily::binomial_logit ? std::pair{"binomial", "logit"}
                                             : std::pair{"poisson", "log"};
}

struct GlmConfig {
  GlmFamily family = GlmFamily::binomial_logit;
  ApproxMethod method = ApproxMethod::quadrature;
  int level = 5;
  int B = 10000;
  PriorSpec prior;
};

struct OutputConfig {
  std::string directory = "design-output";
  int plot_grid = 201;
};

/// Declarative description of one design search, mirroring the CLI's JSON
/// config document.
struct RunConfig {
  // model
  std::string formula;
  int npf = 1;
  std::pair<double, double> tbounds{0.0, 1.0};
  std::vector<std::string> factor_names;
  std::vector<int> dx;
  std::vector<std::vector<double>> knotsx;
  std::vector<std::string> pars;
  std::vector<int> db;
  std::vector<std::vector<double>> knotsb;

  CriterionSpec criterion;
  std::optional<GlmConfig> glm;

  int nruns = 1;
  SearchConfig search;
  bool progress = false;
  std::optional<std::vector<Design>> startd;

  OutputConfig output;
};

/// The model bound to its bases: term layout plus the shared assembly.
struct CompiledModel {
  FormulaAst ast;
  std::vector<BasisSpec> factor_specs;
  std::shared_ptr<const ModelAssembly> assembly;

  const TermList& terms() const { return assembly->terms(); }
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& node, const char* key,
                                     const char* where) {
  auto it = node.find(key);
  if (it == node.end())
    throw ConfigError(std::string(where) + ": missing required field '" + key + "'");
  return *it;
}

template <class T>
T get_or(const nlohmann::json& node, const char* key, T fallback) {
  auto it = node.find(key);
  if (it == node.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_required(const nlohmann::json& node, const char* key, const char* where) {
  try {
    return require(node, key, where).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

inline Eigen::MatrixXd json_matrix(const nlohmann::json& node, const char* what) {
  // Accepts a scalar, a flat array (column vector), or an array of rows.
  try {
    if (node.is_number()) {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = node.get<double>();
      return m;
    }
    if (node.is_array() && !node.empty() && node[0].is_array()) {
      const auto rows = node.size(), cols = node[0].size();
      Eigen::MatrixXd m(rows, cols);
      for (std::size_t r = 0; r < rows; ++r) {
        if (node[r].size() != cols)
          throw ConfigError(std::string(what) + ": ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = node[r][c].get<double>();
      }
      return m;
    }
    if (node.is_array()) {
      Eigen::MatrixXd m(node.size(), 1);
      for (std::size_t r = 0; r < node.size(); ++r) m(r, 0) = node[r].get<double>();
      return m;
    }
  } catch (const nlohmann::json::exception&) {
  }
  throw ConfigError(std::string(what) + ": expected a number, array, or array of arrays");
}

inline PriorSpec parse_prior(const nlohmann::json& node) {
  if (node.contains("unifbound")) {
    UniformPrior prior;
    Eigen::MatrixXd b = json_matrix(node["unifbound"], "prior.unifbound");
    if (b.cols() == 1 && b.rows() == 2) {
      prior.bounds = b;  // common (lo, hi) pair
    } else if (b.rows() == 2) {
      prior.bounds = b;  // 2 x P
    } else {
      throw ConfigError("prior.unifbound must be a pair [lo, hi] or a 2-row matrix");
    }
    return prior;
  }
  if (node.contains("mu") || node.contains("sigma2")) {
    NormalPrior prior;
    Eigen::MatrixXd mu = json_matrix(require(node, "mu", "prior"), "prior.mu");
    if (mu.cols() != 1) throw ConfigError("prior.mu must be a scalar or a vector");
    prior.mu = mu.col(0);
    prior.sigma2 = json_matrix(require(node, "sigma2", "prior"), "prior.sigma2");
    return prior;
  }
  throw ConfigError("prior must specify either {mu, sigma2} or {unifbound}");
}

inline Design parse_design(const nlohmann::json& node, int npf, const char* where) {
  if (!node.is_array() || static_cast<int>(node.size()) != npf)
    throw ConfigError(std::string(where) + ": starting design must list " +
                      std::to_string(npf) + " factor matrices");
  Design design;
  for (int j = 0; j < npf; ++j)
    design.coef.push_back(json_matrix(node[j], where));
  return design;
}

}  // namespace detail

/// Parse and validate a JSON config document. Throws ConfigError describing
/// the first violated constraint.
inline RunConfig parse_run_config(const nlohmann::json& doc) {
  RunConfig config;

  const auto& model = detail::require(doc, "model", "config");
  config.formula = detail::get_required<std::string>(model, "formula", "model");
  config.npf = detail::get_required<int>(model, "npf", "model");
  if (config.npf < 1) throw ConfigError("model.npf must be at least 1");

  const auto tb = detail::get_required<std::vector<double>>(model, "tbounds", "model");
  if (tb.size() != 2 || !(tb[0] < tb[1]))
    throw ConfigError("model.tbounds must be [t0, T] with t0 < T");
  config.tbounds = {tb[0], tb[1]};

  config.dx = detail::get_required<std::vector<int>>(model, "dx", "model");
  config.knotsx = detail::get_required<std::vector<std::vector<double>>>(model, "knotsx", "model");
  if (static_cast<int>(config.dx.size()) != config.npf)
    throw ConfigError("model.dx must have one degree per factor (npf = " +
                      std::to_string(config.npf) + ")");
  if (static_cast<int>(config.knotsx.size()) != config.npf)
    throw ConfigError("model.knotsx must have one knot vector per factor (npf = " +
                      std::to_string(config.npf) + ")");

  config.pars = detail::get_required<std::vector<std::string>>(model, "pars", "model");
  config.db = detail::get_required<std::vector<int>>(model, "db", "model");
  config.knotsb = detail::get_or<std::vector<std::vector<double>>>(
      model, "knotsb", std::vector<std::vector<double>>(config.pars.size()));
  if (config.db.size() != config.pars.size() || config.knotsb.size() != config.pars.size())
    throw ConfigError("model.pars, model.db, and model.knotsb must have equal lengths");
  for (std::size_t q = 0; q < config.pars.size(); ++q) {
    if (config.pars[q] != "power" && config.pars[q] != "bspline")
      throw ConfigError("model.pars entries must be \"power\" or \"bspline\"");
    if (config.pars[q] == "power" && !config.knotsb[q].empty())
      throw ConfigError("parameter " + std::to_string(q + 1) +
                        ": the knot vector of a power-series basis must be empty");
  }

  config.factor_names = detail::get_or<std::vector<std::string>>(model, "factor_names", {});
  if (config.factor_names.empty())
    for (int j = 1; j <= config.npf; ++j) config.factor_names.push_back("x" + std::to_string(j));
  if (static_cast<int>(config.factor_names.size()) != config.npf)
    throw ConfigError("model.factor_names must have npf entries");

  const auto& crit = detail::require(doc, "criterion", "config");
  const auto kind = detail::get_required<std::string>(crit, "kind", "criterion");
  if (kind == "A")
    config.criterion.kind = CriterionKind::A;
  else if (kind == "D")
    config.criterion.kind = CriterionKind::D;
  else
    throw ConfigError("criterion.kind must be \"A\" or \"D\"");
  config.criterion.lambda = detail::get_or<double>(crit, "lambda", 0.0);
  if (!(config.criterion.lambda >= 0.0))
    throw ConfigError("criterion.lambda must be non-negative");

  if (doc.contains("glm")) {
    const auto& glm = doc["glm"];
    GlmConfig gc;
    const auto family = detail::get_required<std::string>(glm, "family", "glm");
    if (family == "binomial" || family == "binomial_logit")
      gc.family = GlmFamily::binomial_logit;
    else if (family == "poisson" || family == "poisson_log")
      gc.family = GlmFamily::poisson_log;
    else
      throw ConfigError("glm.family must be \"binomial\" (logit link) or \"poisson\" (log link)");
    const auto method = detail::get_required<std::string>(glm, "method", "glm");
    if (method == "quadrature")
      gc.method = ApproxMethod::quadrature;
    else if (method == "MC" || method == "mc")
      gc.method = ApproxMethod::mc;
    else
      throw ConfigError("glm.method must be \"quadrature\" or \"MC\"");
    gc.level = detail::get_or<int>(glm, "level", 5);
    if (gc.level < 1) throw ConfigError("glm.level must be at least 1");
    gc.B = detail::get_or<int>(glm, "B", 10000);
    if (gc.B < 1) throw ConfigError("glm.B must be at least 1");
    gc.prior = detail::parse_prior(detail::require(glm, "prior", "glm"));
    config.glm = std::move(gc);
  }

  const auto& search = detail::require(doc, "search", "config");
  config.nruns = detail::get_required<int>(search, "nruns", "search");
  if (config.nruns < 1) throw ConfigError("search.nruns must be at least 1");
  config.search.nsd = detail::get_or<int>(search, "nsd", 1);
  if (config.search.nsd < 1) throw ConfigError("search.nsd must be at least 1");
  config.search.seed = detail::get_or<std::uint64_t>(search, "seed", 0);
  config.search.tol = detail::get_or<double>(search, "tol", 0.0001);
  if (!(config.search.tol > 0.0)) throw ConfigError("search.tol must be positive");
  config.search.dlbound = detail::get_or<double>(search, "dlbound", -1.0);
  config.search.dubound = detail::get_or<double>(search, "dubound", 1.0);
  if (!(config.search.dlbound < config.search.dubound))
    throw ConfigError("search.dlbound must be below search.dubound");
  config.search.max_sweeps = detail::get_or<int>(search, "max_sweeps", 200);
  if (config.search.max_sweeps < 1) throw ConfigError("search.max_sweeps must be at least 1");
  config.search.workers = detail::get_or<int>(search, "workers", 1);
  if (config.search.workers < 1) throw ConfigError("search.workers must be at least 1");
  config.progress = detail::get_or<bool>(search, "progress", false);

  if (search.contains("startd")) {
    const auto& sd = search["startd"];
    if (!sd.is_array() || static_cast<int>(sd.size()) != config.search.nsd)
      throw ConfigError("search.startd must be a list of nsd = " +
                        std::to_string(config.search.nsd) + " starting designs");
    std::vector<Design> starts;
    for (const auto& entry : sd)
      starts.push_back(detail::parse_design(entry, config.npf, "search.startd"));
    config.startd = std::move(starts);
  }

  if (doc.contains("output")) {
    const auto& out = doc["output"];
    config.output.directory = detail::get_or<std::string>(out, "directory", config.output.directory);
    config.output.plot_grid = detail::get_or<int>(out, "plot_grid", 201);
    if (config.output.plot_grid < 2) throw ConfigError("output.plot_grid must be at least 2");
  }

  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

/// Build the factor and parameter bases, expand the formula, and assemble the
/// design-independent model pieces. Performs the cross-field validation that
/// needs the parsed formula (term counts, factor names, knot placement).
inline CompiledModel compile_model(const RunConfig& config) {
  CompiledModel compiled;
  compiled.ast = parse_formula(config.formula);

  if (compiled.ast.terms.size() != config.pars.size())
    throw ConfigError("model.pars lists " + std::to_string(config.pars.size()) +
                      " parameter bases but the formula has " +
                      std::to_string(compiled.ast.terms.size()) + " terms");

  auto make_basis = [&](BasisFamily family, int degree, const std::vector<double>& knots,
                        const std::string& what) {
    try {
      return BasisSpec(family, degree, knots, config.tbounds);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(what + ": " + e.what());
    }
  };

  for (int j = 0; j < config.npf; ++j)
    compiled.factor_specs.push_back(make_basis(BasisFamily::bspline, config.dx[j],
                                               config.knotsx[j],
                                               "factor " + config.factor_names[j]));

  std::vector<BasisSpec> param_specs;
  for (std::size_t q = 0; q < config.pars.size(); ++q) {
    const auto family =
        config.pars[q] == "power" ? BasisFamily::power : BasisFamily::bspline;
    param_specs.push_back(
        make_basis(family, config.db[q], config.knotsb[q], "parameter " + std::to_string(q + 1)));
  }

  TermList terms =
      expand_terms(compiled.ast, config.factor_names, compiled.factor_specs, param_specs);
  if (terms.P() > SpdKernel::kMaxDim)
    throw ConfigError("model has " + std::to_string(terms.P()) +
                      " parameters; at most " + std::to_string(SpdKernel::kMaxDim) +
                      " are supported");
  compiled.assembly =
      std::make_shared<const ModelAssembly>(std::move(terms), compiled.factor_specs);
  return compiled;
}

}  // namespace fdoe
