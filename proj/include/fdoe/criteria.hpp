#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fdoe {

enum class CriterionKind { A, D };

/// Objective selection and smoothing. A-optimality minimizes the trace of the
/// penalized information inverse; D-optimality maximizes its log determinant.
struct CriterionSpec {
  CriterionKind kind = CriterionKind::D;
  double lambda = 0.0;

  bool maximize() const noexcept { return kind == CriterionKind::D; }

  /// Sentinel for singular information matrices: the worst value in the
  /// criterion's direction, so the exchange can move away from it.
  double infeasible() const noexcept {
    return maximize() ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
  }

  /// Strict improvement in the criterion direction; never true for NaN.
  bool better(double candidate, double incumbent) const noexcept {
    return maximize() ? candidate > incumbent : candidate < incumbent;
  }

  const char* name() const noexcept {
    return kind == CriterionKind::A ? "A-optimality" : "D-optimality";
  }
};

enum class GlmFamily { binomial_logit, poisson_log };

/// GLM iterated-weights diagonal entry 1 / (g'(mu)^2 Var(y)) at linear
/// predictor eta. Stable for |eta| up to ~700.
inline double glm_weight(GlmFamily family, double eta) {
  if (!std::isfinite(eta)) throw std::invalid_argument("glm_weight: non-finite eta");
  if (family == GlmFamily::poisson_log) return std::exp(eta);
  const double e = std::exp(-std::abs(eta));  // logit: mu(1-mu), symmetric in eta
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

/// Cholesky-based log-determinant and trace-inverse for symmetric positive
/// definite matrices, with a symmetric-eigendecomposition fallback when a
/// pivot falls below the 1e-12 relative tolerance. Owns its workspace so the
/// optimizer's inner loop runs allocation-free.
class SpdKernel {
 public:
  SpdKernel() = default;
  explicit SpdKernel(int dim) { resize(dim); }

  void resize(int dim) {
    if (dim > kMaxDim)
      throw std::invalid_argument("SpdKernel: parameter dimension exceeds " +
                                  std::to_string(kMaxDim));
    dim_ = dim;
    work_.resize(dim, dim);
    chol_.resize(dim, dim);
  }

  /// Copies the lower triangle of M into the workspace, applies the rank-one
  /// updates add*u u^T - sub*v v^T, and evaluates the criterion.
  template <class M, class U, class V>
  double value_updated(const M& m, const U& u, double add, const V& v, double sub,
                       const CriterionSpec& spec) {
    for (int c = 0; c < dim_; ++c)
      for (int r = c; r < dim_; ++r)
        work_(r, c) = m(r, c) + add * u[r] * u[c] - sub * v[r] * v[c];
    return eval(spec);
  }

  template <class M>
  double value(const M& m, const CriterionSpec& spec) {
    for (int c = 0; c < dim_; ++c)
      for (int r = c; r < dim_; ++r) work_(r, c) = m(r, c);
    return eval(spec);
  }

 private:
  // Lower Cholesky of work_ into chol_; false when a pivot drops below the
  // relative tolerance. work_ stays intact for the eigendecomposition
  // fallback.
  bool factorize() {
    double scale = 1.0;
    for (int k = 0; k < dim_; ++k) scale = std::max(scale, std::abs(work_(k, k)));
    const double tol = 1e-12 * scale;
    for (int k = 0; k < dim_; ++k) {
      double pivot = work_(k, k);
      for (int j = 0; j < k; ++j) pivot -= chol_(k, j) * chol_(k, j);
      if (!(pivot > tol)) return false;
      const double l = std::sqrt(pivot);
      chol_(k, k) = l;
      for (int r = k + 1; r < dim_; ++r) {
        double s = work_(r, k);
        for (int j = 0; j < k; ++j) s -= chol_(r, j) * chol_(k, j);
        chol_(r, k) = s / l;
      }
    }
    return true;
  }

  double eval(const CriterionSpec& spec) {
    if (!factorize()) return eval_by_eigen(spec);
    if (spec.kind == CriterionKind::D) {
      double logdet = 0.0;
      for (int k = 0; k < dim_; ++k) logdet += std::log(chol_(k, k));
      return 2.0 * logdet;
    }
    // tr(M^-1) = squared Frobenius norm of L^-1, column by forward solve.
    double trace = 0.0;
    for (int c = 0; c < dim_; ++c) {
      for (int r = c; r < dim_; ++r) {
        double s = (r == c) ? 1.0 : 0.0;
        for (int j = c; j < r; ++j) s -= chol_(r, j) * solve_[j];
        solve_[r] = s / chol_(r, r);
        trace += solve_[r] * solve_[r];
      }
    }
    return trace;
  }

  double eval_by_eigen(const CriterionSpec& spec) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        work_.selfadjointView<Eigen::Lower>());
    const Eigen::VectorXd& ev = solver.eigenvalues();
    const double floor = 1e-12 * std::max(1.0, ev[dim_ - 1]);
    if (!(ev[0] > floor)) return spec.infeasible();
    if (spec.kind == CriterionKind::D) return ev.array().log().sum();
    return ev.array().inverse().sum();
  }

 public:
  static constexpr int kMaxDim = 64;

 private:
  int dim_ = 0;
  Eigen::MatrixXd work_;
  Eigen::MatrixXd chol_;
  double solve_[kMaxDim];  // forward-substitution column
};

/// Linear-model objective on the penalized information Z^T Z + lambda R0.
/// Returns the infeasibility sentinel (not an exception) on singularity.
inline double objective_lm(const Eigen::MatrixXd& z, const Eigen::MatrixXd& r0,
                           const CriterionSpec& spec) {
  if (!z.allFinite()) throw std::invalid_argument("objective_lm: non-finite entries in Z");
  const int p = static_cast<int>(z.cols());
  if (r0.rows() != p || r0.cols() != p)
    throw std::invalid_argument("objective_lm: R0 must be P x P");
  if (p > SpdKernel::kMaxDim)
    throw std::invalid_argument("objective_lm: parameter dimension too large");
  Eigen::MatrixXd m = z.transpose() * z + spec.lambda * r0;
  SpdKernel kernel(p);
  return kernel.value(m, spec);
}

/// Fisher information Z^T W Z + lambda R0 with W the diagonal GLM weight
/// matrix evaluated at linear predictor Z theta.
inline Eigen::MatrixXd fisher_information(const Eigen::MatrixXd& z,
                                          const Eigen::VectorXd& theta, GlmFamily family,
                                          double lambda, const Eigen::MatrixXd& r0) {
  if (theta.size() != z.cols())
    throw std::invalid_argument("fisher_information: theta length must match Z columns");
  if (r0.rows() != z.cols() || r0.cols() != z.cols())
    throw std::invalid_argument("fisher_information: R0 must be P x P");
  Eigen::VectorXd w = z * theta;
  for (int i = 0; i < w.size(); ++i) w[i] = glm_weight(family, w[i]);
  return z.transpose() * w.asDiagonal() * z + lambda * r0;
}

/// Pseudo-Bayesian objective at a single parameter value.
inline double objective_glm_at_theta(const Eigen::MatrixXd& z, const Eigen::VectorXd& theta,
                                     GlmFamily family, const Eigen::MatrixXd& r0,
                                     const CriterionSpec& spec) {
  if (!z.allFinite())
    throw std::invalid_argument("objective_glm_at_theta: non-finite entries in Z");
  const int p = static_cast<int>(z.cols());
  if (p > SpdKernel::kMaxDim)
    throw std::invalid_argument("objective_glm_at_theta: parameter dimension too large");
  Eigen::MatrixXd info = fisher_information(z, theta, family, spec.lambda, r0);
  SpdKernel kernel(p);
  return kernel.value(info, spec);
}

/// Conjugate normal-inverse-gamma state for the linear model.
struct NigState {
  Eigen::VectorXd mu;
  Eigen::MatrixXd v;
  double a = 1.0;
  double b = 1.0;
};

/// Posterior update given a model matrix and responses:
///   V_N = (Z^T Z + V^-1)^-1,  theta_N = V_N (V^-1 mu + Z^T y),
///   a* = a + n,  b* = b + mu^T V^-1 mu + y^T y - theta_N^T V_N^-1 theta_N.
inline NigState nig_posterior_update(const NigState& prior, const Eigen::MatrixXd& z,
                                     const Eigen::VectorXd& y) {
  const int p = static_cast<int>(prior.mu.size());
  if (prior.v.rows() != p || prior.v.cols() != p)
    throw std::invalid_argument("nig_posterior_update: V must be P x P");
  if (z.rows() != y.size() || (z.rows() > 0 && z.cols() != p))
    throw std::invalid_argument("nig_posterior_update: Z/y shapes inconsistent");

  Eigen::LLT<Eigen::MatrixXd> vllt(prior.v);
  if (vllt.info() != Eigen::Success)
    throw std::invalid_argument("nig_posterior_update: prior covariance V is singular");
  Eigen::MatrixXd vinv = vllt.solve(Eigen::MatrixXd::Identity(p, p));

  Eigen::MatrixXd precision = vinv;
  if (z.rows() > 0) precision += z.transpose() * z;
  Eigen::LLT<Eigen::MatrixXd> nllt(precision);
  if (nllt.info() != Eigen::Success)
    throw std::invalid_argument("nig_posterior_update: posterior precision not positive definite");

  NigState post;
  post.v = nllt.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd rhs = vinv * prior.mu;
  if (z.rows() > 0) rhs += z.transpose() * y;
  post.mu = nllt.solve(rhs);
  post.a = prior.a + static_cast<double>(z.rows());
  post.b = prior.b + prior.mu.dot(vinv * prior.mu) + y.squaredNorm() - post.mu.dot(rhs);
  return post;
}

}  // namespace fdoe
