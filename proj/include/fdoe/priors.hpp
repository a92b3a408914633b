#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fdoe/errors.hpp"
#include "fdoe/quadrature.hpp"

namespace fdoe {

/// Normal prior over theta. `mu` has length 1 (common mean) or P; `sigma2`
/// is 1x1 (common variance), Px1 (per-dimension variances), or PxP (full
/// covariance).
struct NormalPrior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma2;

  Eigen::VectorXd mean(int p) const {
    if (mu.size() == 1) return Eigen::VectorXd::Constant(p, mu[0]);
    if (mu.size() != p)
      throw ConfigError("normal prior mean must be a scalar or have length " + std::to_string(p));
    return mu;
  }

  Eigen::MatrixXd covariance(int p) const {
    Eigen::MatrixXd cov;
    if (sigma2.rows() == 1 && sigma2.cols() == 1) {
      cov = sigma2(0, 0) * Eigen::MatrixXd::Identity(p, p);
    } else if (sigma2.cols() == 1 && sigma2.rows() == p) {
      cov = sigma2.col(0).asDiagonal();
    } else if (sigma2.rows() == p && sigma2.cols() == p) {
      cov = 0.5 * (sigma2 + sigma2.transpose());
    } else {
      throw ConfigError("normal prior variance must be a scalar, a length-" + std::to_string(p) +
                        " vector, or a " + std::to_string(p) + "x" + std::to_string(p) +
                        " matrix");
    }
    return cov;
  }
};

/// Uniform prior; `bounds` is 2x1 (common interval) or 2xP with the lower
/// bounds in row 0 and the upper bounds in row 1.
struct UniformPrior {
  Eigen::MatrixXd bounds;

  Eigen::VectorXd lower(int p) const { return row_broadcast(0, p); }
  Eigen::VectorXd upper(int p) const { return row_broadcast(1, p); }

  void validate(int p) const {
    if (bounds.rows() != 2)
      throw ConfigError("uniform prior bounds must have 2 rows (lower; upper)");
    if (bounds.cols() != 1 && bounds.cols() != p)
      throw ConfigError("uniform prior bounds must have 1 or " + std::to_string(p) + " columns");
    for (int c = 0; c < bounds.cols(); ++c)
      if (!(bounds(0, c) < bounds(1, c)))
        throw ConfigError("uniform prior requires lower < upper in every dimension");
  }

 private:
  Eigen::VectorXd row_broadcast(int r, int p) const {
    validate(p);
    if (bounds.cols() == 1) return Eigen::VectorXd::Constant(p, bounds(r, 0));
    return bounds.row(r).transpose();
  }
};

using PriorSpec = std::variant<NormalPrior, UniformPrior>;

/// Abscissas (B x P) and probability weights (sum 1) for approximating prior
/// expectations; also carries plain Monte Carlo samples with uniform weights.
struct QuadratureGrid {
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;

  int size() const noexcept { return static_cast<int>(nodes.rows()); }
  int dims() const noexcept { return static_cast<int>(nodes.cols()); }
};

namespace detail {

// Symmetric square root of an SPD matrix; rejects non-positive spectra.
inline Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  if (!(ev[0] > 1e-12 * std::max(1.0, ev[ev.size() - 1])))
    throw ConfigError("prior covariance is not symmetric positive definite");
  return solver.eigenvectors() * ev.array().sqrt().matrix().asDiagonal() *
         solver.eigenvectors().transpose();
}

inline std::int64_t tensor_size(int level, int p) {
  std::int64_t b = 1;
  for (int k = 0; k < p; ++k) {
    b *= level;
    if (b > 20'000'000)
      throw ConfigError("quadrature grid of level^P = " + std::to_string(level) + "^" +
                        std::to_string(p) + " points is too large; use MC instead");
  }
  return b;
}

// Tensorize per-dimension rules; the first dimension's index varies slowest.
inline QuadratureGrid tensor_grid(const std::vector<Eigen::VectorXd>& nodes1d,
                                  const std::vector<Eigen::VectorXd>& weights1d) {
  const int p = static_cast<int>(nodes1d.size());
  const int level = static_cast<int>(nodes1d[0].size());
  const std::int64_t b = tensor_size(level, p);
  QuadratureGrid grid;
  grid.nodes.resize(b, p);
  grid.weights.resize(b);
  std::vector<int> index(p, 0);
  for (std::int64_t row = 0; row < b; ++row) {
    double w = 1.0;
    for (int d = 0; d < p; ++d) {
      grid.nodes(row, d) = nodes1d[d][index[d]];
      w *= weights1d[d][index[d]];
    }
    grid.weights[row] = w;
    for (int d = p - 1; d >= 0; --d) {
      if (++index[d] < level) break;
      index[d] = 0;
    }
  }
  return grid;
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace detail

/// Tensor-product probabilists' Gauss-Hermite grid for a normal prior:
/// level^P abscissas, affinely mapped by the mean and the symmetric square
/// root of the covariance. Exact for per-dimension moments of degree
/// <= 2*level - 1.
inline QuadratureGrid gauss_hermite_grid(int level, const NormalPrior& prior, int p) {
  if (level < 1) throw ConfigError("quadrature level must be at least 1");
  const GaussRule rule = gauss_hermite_prob(level);
  QuadratureGrid grid = detail::tensor_grid(std::vector(p, rule.nodes),
                                            std::vector(p, rule.weights));
  const Eigen::VectorXd mean = prior.mean(p);
  const Eigen::MatrixXd root = detail::spd_sqrt(prior.covariance(p));
  grid.nodes = (grid.nodes * root).rowwise() + mean.transpose();
  return grid;
}

/// Tensor-product Gauss-Legendre grid integrating against the uniform density
/// on the prior box; weights sum to 1.
inline QuadratureGrid gauss_legendre_grid(int level, const UniformPrior& prior, int p) {
  if (level < 1) throw ConfigError("quadrature level must be at least 1");
  prior.validate(p);
  GaussRule rule = gauss_legendre(level);
  rule.weights /= rule.weights.sum();  // probability weights on [-1, 1]
  const Eigen::VectorXd lo = prior.lower(p), hi = prior.upper(p);
  std::vector<Eigen::VectorXd> nodes1d(p);
  for (int d = 0; d < p; ++d)
    nodes1d[d] = (lo[d] + (rule.nodes.array() + 1.0) * 0.5 * (hi[d] - lo[d])).matrix();
  return detail::tensor_grid(nodes1d, std::vector(p, rule.weights));
}

/// B independent draws from the prior, reproducible for a given seed.
/// Row b is one draw of theta; entries are generated row by row.
inline Eigen::MatrixXd mc_sample(const PriorSpec& prior, int b, int p, std::uint64_t seed) {
  if (b < 1) throw ConfigError("Monte Carlo sample size must be at least 1");
  std::mt19937_64 rng = detail::seeded_engine(seed);
  Eigen::MatrixXd draws(b, p);
  if (const auto* normal = std::get_if<NormalPrior>(&prior)) {
    const Eigen::VectorXd mean = normal->mean(p);
    const Eigen::MatrixXd root = detail::spd_sqrt(normal->covariance(p));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int row = 0; row < b; ++row)
      for (int d = 0; d < p; ++d) draws(row, d) = gauss(rng);
    draws = (draws * root).rowwise() + mean.transpose();
  } else {
    const auto& uniform = std::get<UniformPrior>(prior);
    const Eigen::VectorXd lo = uniform.lower(p), hi = uniform.upper(p);
    for (int row = 0; row < b; ++row)
      for (int d = 0; d < p; ++d) {
        std::uniform_real_distribution<double> unif(lo[d], hi[d]);
        draws(row, d) = unif(rng);
      }
  }
  return draws;
}

/// Monte Carlo sample wrapped as a grid with uniform weights 1/B.
inline QuadratureGrid mc_grid(const PriorSpec& prior, int b, int p, std::uint64_t seed) {
  QuadratureGrid grid;
  grid.nodes = mc_sample(prior, b, p, seed);
  grid.weights = Eigen::VectorXd::Constant(b, 1.0 / b);
  return grid;
}

/// Weighted prior expectation sum_b w_b f(theta_b). A non-finite objective at
/// any node (an infeasibility sentinel) is returned immediately, making the
/// whole design infeasible.
template <class F>
double expected_objective(F&& eval_at_theta, const Eigen::MatrixXd& points,
                          const Eigen::VectorXd& weights) {
  if (points.rows() != weights.size())
    throw std::invalid_argument("expected_objective: node/weight counts differ");
  double acc = 0.0;
  for (int b = 0; b < points.rows(); ++b) {
    const double value = eval_at_theta(Eigen::VectorXd(points.row(b)));
    if (!std::isfinite(value)) return value;
    acc += weights[b] * value;
  }
  return acc;
}

}  // namespace fdoe
