#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "fdoe/basis.hpp"
#include "fdoe/errors.hpp"
#include "fdoe/quadrature.hpp"

namespace fdoe {

namespace detail {

inline std::vector<double> merged_breakpoints(const std::vector<const BasisSpec*>& specs) {
  std::vector<double> pts;
  for (const BasisSpec* s : specs) {
    auto b = s->breakpoints();
    pts.insert(pts.end(), b.begin(), b.end());
  }
  std::sort(pts.begin(), pts.end());
  const double tol = 1e-12 * (pts.back() - pts.front());
  std::vector<double> out;
  for (double p : pts)
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  return out;
}

// Integrates an outer-product integrand exactly over each span of the merged
// breakpoint grid. `rows(t)` and `cols(t)` must be polynomials of total degree
// <= poly_degree on every span.
template <class RowFn, class ColFn>
Eigen::MatrixXd span_exact_integral(const std::vector<const BasisSpec*>& specs,
                                    int poly_degree, int n_rows, int n_cols,
                                    RowFn&& rows, ColFn&& cols) {
  const std::vector<double> pts = merged_breakpoints(specs);
  const GaussRule rule = gauss_legendre((poly_degree + 1) / 2 + 1);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_rows, n_cols);
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const double a = pts[s], b = pts[s + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int k = 0; k < rule.nodes.size(); ++k) {
      const double t = mid + half * rule.nodes[k];
      acc.noalias() += (half * rule.weights[k]) * rows(t) * cols(t).transpose();
    }
  }
  return acc;
}

}  // namespace detail

/// Integral of factor x parameter basis products over [t0, T]:
/// entry (u, v) = int c_u(t) b_v(t) dt. Exact per-span Gauss-Legendre.
inline Eigen::MatrixXd cross_gram(const BasisSpec& factor_spec, const BasisSpec& param_spec) {
  if (!factor_spec.same_tbounds(param_spec))
    throw ConfigError("cross_gram: factor and parameter bases use different time bounds");
  return detail::span_exact_integral(
      {&factor_spec, &param_spec}, factor_spec.degree() + param_spec.degree(),
      factor_spec.dimension(), param_spec.dimension(),
      [&](double t) { return factor_spec.eval(t); },
      [&](double t) { return param_spec.eval(t); });
}

/// Gram tensor for interaction and polynomial terms: the row index runs over
/// the Kronecker product of the factor bases (first factor's index varies
/// slowest), entry = int prod_m c^(m)_{u_m}(t) b_v(t) dt.
inline Eigen::MatrixXd product_gram(const std::vector<BasisSpec>& factor_specs,
                                    const BasisSpec& param_spec) {
  if (factor_specs.empty())
    throw std::invalid_argument("product_gram: empty factor sequence");
  std::vector<const BasisSpec*> all;
  int rows = 1, degree = param_spec.degree();
  for (const BasisSpec& s : factor_specs) {
    if (!s.same_tbounds(param_spec))
      throw ConfigError("product_gram: bases use different time bounds");
    all.push_back(&s);
    rows *= s.dimension();
    degree += s.degree();
  }
  all.push_back(&param_spec);

  Eigen::VectorXd kron(rows);
  auto kron_at = [&](double t) -> const Eigen::VectorXd& {
    kron.head(1).setOnes();
    int filled = 1;
    for (const BasisSpec& s : factor_specs) {
      const Eigen::VectorXd v = s.eval(t);
      const int d = static_cast<int>(v.size());
      for (int i = filled - 1; i >= 0; --i)
        for (int j = d - 1; j >= 0; --j) kron[i * d + j] = kron[i] * v[j];
      filled *= d;
    }
    return kron;
  };

  return detail::span_exact_integral(
      all, degree, rows, param_spec.dimension(), kron_at,
      [&](double t) { return param_spec.eval(t); });
}

/// Curvature penalty block: entry (u, v) = int b_u''(t) b_v''(t) dt.
/// Identically zero for bases of degree < 2.
inline Eigen::MatrixXd roughness_matrix(const BasisSpec& param_spec) {
  const int n = param_spec.dimension();
  if (param_spec.degree() < 2) return Eigen::MatrixXd::Zero(n, n);
  const int d2 = param_spec.degree() - 2;
  return detail::span_exact_integral(
      {&param_spec}, 2 * d2, n, n,
      [&](double t) { return param_spec.eval_deriv(t, 2); },
      [&](double t) { return param_spec.eval_deriv(t, 2); });
}

}  // namespace fdoe
