#pragma once

// Shared test fixtures and a design-matrix oracle that integrates the model
// terms numerically instead of using the cached Gram route.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "fdoe/formula.hpp"
#include "fdoe/model.hpp"
#include "support/oracles.hpp"

namespace fixtures {

/// Two quadratic B-spline factors with an interaction; parameter bases of
/// degree 2/1/2 with a single knot at 0.5 (12 parameters in total).
struct InteractionModel {
  std::vector<fdoe::BasisSpec> factor_specs;
  fdoe::TermList terms;

  InteractionModel() {
    const fdoe::BasisSpec factor = fdoe::BasisSpec::bspline(2, {0.2, 0.4, 0.6, 0.8});
    factor_specs = {factor, factor};
    terms = fdoe::expand_terms(fdoe::parse_formula("~ x1 + x2 + x1:x2"), {"x1", "x2"},
                               factor_specs,
                               {fdoe::BasisSpec::bspline(2, {0.5}),
                                fdoe::BasisSpec::bspline(1, {0.5}),
                                fdoe::BasisSpec::bspline(2, {0.5})});
  }
};

inline fdoe::Design random_design(const std::vector<fdoe::BasisSpec>& specs, int runs,
                                  std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  fdoe::Design d;
  for (const auto& s : specs) {
    Eigen::MatrixXd m(runs, s.dimension());
    for (int i = 0; i < m.rows(); ++i)
      for (int l = 0; l < m.cols(); ++l) m(i, l) = unif(rng);
    d.coef.push_back(std::move(m));
  }
  return d;
}

/// Model matrix by direct numerical integration: builds each run's factor
/// functions pointwise from the coefficients and integrates against the
/// parameter bases with adaptive quadrature.
inline Eigen::MatrixXd model_matrix_oracle(const fdoe::TermList& terms,
                                           const std::vector<fdoe::BasisSpec>& factor_specs,
                                           const fdoe::Design& design) {
  const int n = design.runs();
  Eigen::MatrixXd z(n, terms.P());
  auto profile = [&](int factor, int run, double t) {
    return design.coef[factor].row(run).dot(factor_specs[factor].eval(t));
  };
  for (int i = 0; i < n; ++i) {
    for (const fdoe::BoundTerm& term : terms.terms) {
      std::vector<const fdoe::BasisSpec*> involved{&term.param_basis};
      for (int j : term.factors) involved.push_back(&factor_specs[j]);
      std::vector<double> pts;
      for (const auto* s : involved) {
        auto b = s->breakpoints();
        pts.insert(pts.end(), b.begin(), b.end());
      }
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

      for (int v = 0; v < term.nbeta; ++v) {
        double value = 0.0;
        switch (term.kind) {
          case fdoe::TermKind::intercept:
            value = term.param_basis.tmax() - term.param_basis.tmin();
            break;
          case fdoe::TermKind::main:
            value = oracles::integrate_piecewise(
                [&](double t) {
                  return profile(term.factors[0], i, t) * term.param_basis.eval(t)[v];
                },
                pts, 1e-12);
            break;
          case fdoe::TermKind::interaction:
            value = oracles::integrate_piecewise(
                [&](double t) {
                  return profile(term.factors[0], i, t) * profile(term.factors[1], i, t) *
                         term.param_basis.eval(t)[v];
                },
                pts, 1e-12);
            break;
          case fdoe::TermKind::polynomial:
            value = oracles::integrate_piecewise(
                [&](double t) {
                  return std::pow(profile(term.factors[0], i, t), term.poly_degree) *
                         term.param_basis.eval(t)[v];
                },
                pts, 1e-12);
            break;
        }
        z(i, term.col_offset + v) = value;
      }
    }
  }
  return z;
}

}  // namespace fixtures
