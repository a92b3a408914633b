#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "fdoe/criteria.hpp"
#include "fdoe/model.hpp"
#include "fdoe/priors.hpp"

namespace fdoe {

/// A single-coordinate change: set coefficient `coef` of run `run` in factor
/// `factor` to `value`.
struct CoordMove {
  int factor;
  int run;
  int coef;
  double value;
};

// Coordinate objectives keep the current design plus whatever cached state
// makes probing a single changed coordinate cheap. probe() must not change
// observable state; commit() applies the move and returns the objective
// by the same arithmetic as the matching probe, so accepted values agree
// bit for bit.
template <class T>
concept CoordinateObjective = requires(T obj, const Design& design, const CoordMove& move) {
  { obj.initialize(design) } -> std::convertible_to<double>;
  { obj.probe(move) } -> std::convertible_to<double>;
  { obj.commit(move) } -> std::convertible_to<double>;
  { obj.design() } -> std::convertible_to<const Design&>;
  { obj.criterion() } -> std::convertible_to<const CriterionSpec&>;
};

/// Linear-model A/D objective with rank-one information updates per probe:
/// changing one coordinate touches one row of Z, so the penalized information
/// moves by -z_i z_i^T + z_i' z_i'^T.
class LinearModelObjective {
 public:
  LinearModelObjective(std::shared_ptr<const ModelAssembly> assembly, CriterionSpec spec)
      : assembly_(std::move(assembly)), spec_(spec), kernel_(assembly_->P()) {
    lr0_ = spec_.lambda * assembly_->roughness();
  }

  double initialize(const Design& start) {
    design_ = start;
    z_ = assembly_->model_matrix(design_);
    info_ = z_.transpose() * z_ + lr0_;
    row_.resize(assembly_->P());
    return kernel_.value(info_, spec_);
  }

  double probe(const CoordMove& move) {
    candidate_row(move);
    return kernel_.value_updated(info_, row_, 1.0, z_.row(move.run), 1.0, spec_);
  }

  double commit(const CoordMove& move) {
    const double value = probe(move);  // fills row_ for this move
    const int p = assembly_->P();
    // Mirror SpdKernel::value_updated's expression exactly; only the lower
    // triangle is read afterwards.
    for (int c = 0; c < p; ++c)
      for (int r = c; r < p; ++r)
        info_(r, c) = info_(r, c) + row_[r] * row_[c] - z_(move.run, r) * z_(move.run, c);
    z_.row(move.run) = row_;
    design_.coef[move.factor](move.run, move.coef) = move.value;
    return value;
  }

  const Design& design() const noexcept { return design_; }
  const CriterionSpec& criterion() const noexcept { return spec_; }

 private:
  void candidate_row(const CoordMove& move) {
    auto& cell = design_.coef[move.factor](move.run, move.coef);
    const double saved = cell;
    cell = move.value;
    row_ = z_.row(move.run);
    assembly_->fill_row_for_factor(design_, move.run, move.factor, row_);
    cell = saved;
  }

  std::shared_ptr<const ModelAssembly> assembly_;
  CriterionSpec spec_;
  SpdKernel kernel_;
  Eigen::MatrixXd lr0_;
  Design design_;
  Eigen::MatrixXd z_;
  Eigen::MatrixXd info_;
  Eigen::RowVectorXd row_;
};

/// Prior expectation of the pseudo-Bayesian GLM objective over a quadrature
/// grid or a shared Monte Carlo sample. Per theta_b the evaluator keeps the
/// current information matrix, so a probe costs one rank-two update and one
/// small Cholesky per node.
class GlmExpectedObjective {
 public:
  GlmExpectedObjective(std::shared_ptr<const ModelAssembly> assembly, CriterionSpec spec,
                       GlmFamily family, std::shared_ptr<const QuadratureGrid> grid)
      : assembly_(std::move(assembly)),
        spec_(spec),
        family_(family),
        grid_(std::move(grid)),
        kernel_(assembly_->P()) {
    if (grid_->dims() != assembly_->P())
      throw ConfigError("prior grid dimension " + std::to_string(grid_->dims()) +
                        " does not match the parameter count " + std::to_string(assembly_->P()));
    lr0_ = spec_.lambda * assembly_->roughness();
    theta_t_ = grid_->nodes.transpose();  // P x B, nodes contiguous per column
  }

  double initialize(const Design& start) {
    const int p = assembly_->P();
    const int b = grid_->size();
    design_ = start;
    z_ = assembly_->model_matrix(design_);
    const int n = static_cast<int>(z_.rows());
    eta_ = z_ * theta_t_;  // n x B
    weight_ = eta_;
    for (int col = 0; col < b; ++col)
      for (int i = 0; i < n; ++i) weight_(i, col) = glm_weight(family_, eta_(i, col));
    info_.assign(static_cast<std::size_t>(b) * p * p, 0.0);
    for (int col = 0; col < b; ++col) {
      Eigen::Map<Eigen::MatrixXd> m(info_.data() + static_cast<std::size_t>(col) * p * p, p, p);
      m = lr0_;
      for (int i = 0; i < n; ++i)
        m.selfadjointView<Eigen::Lower>().rankUpdate(z_.row(i).transpose(), weight_(i, col));
    }
    row_.resize(p);
    eta_row_.resize(b);
    return current_value();
  }

  double probe(const CoordMove& move) {
    candidate_row(move);
    const int p = assembly_->P();
    eta_row_.noalias() = theta_t_.transpose() * row_.transpose();
    double acc = 0.0;
    for (int col = 0; col < grid_->size(); ++col) {
      Eigen::Map<const Eigen::MatrixXd> m(info_.data() + static_cast<std::size_t>(col) * p * p,
                                          p, p);
      const double w_new = glm_weight(family_, eta_row_[col]);
      const double value = kernel_.value_updated(m, row_, w_new, z_.row(move.run),
                                                 weight_(move.run, col), spec_);
      if (!std::isfinite(value)) return value;
      acc += grid_->weights[col] * value;
    }
    return acc;
  }

  double commit(const CoordMove& move) {
    const int p = assembly_->P();
    candidate_row(move);
    eta_row_.noalias() = theta_t_.transpose() * row_.transpose();
    for (int col = 0; col < grid_->size(); ++col) {
      Eigen::Map<Eigen::MatrixXd> m(info_.data() + static_cast<std::size_t>(col) * p * p, p, p);
      const double w_new = glm_weight(family_, eta_row_[col]);
      // Same expression as SpdKernel::value_updated so the committed state
      // reproduces the probed objective bit for bit.
      for (int c = 0; c < p; ++c)
        for (int r = c; r < p; ++r)
          m(r, c) = m(r, c) + w_new * row_[r] * row_[c] -
                    weight_(move.run, col) * z_(move.run, r) * z_(move.run, c);
      weight_(move.run, col) = w_new;
    }
    eta_.row(move.run) = eta_row_.transpose();
    z_.row(move.run) = row_;
    design_.coef[move.factor](move.run, move.coef) = move.value;
    return current_value();
  }

  const Design& design() const noexcept { return design_; }
  const CriterionSpec& criterion() const noexcept { return spec_; }

 private:
  double current_value() {
    const int p = assembly_->P();
    double acc = 0.0;
    for (int col = 0; col < grid_->size(); ++col) {
      Eigen::Map<const Eigen::MatrixXd> m(info_.data() + static_cast<std::size_t>(col) * p * p,
                                          p, p);
      const double value = kernel_.value(m, spec_);
      if (!std::isfinite(value)) return value;
      acc += grid_->weights[col] * value;
    }
    return acc;
  }

  void candidate_row(const CoordMove& move) {
    auto& cell = design_.coef[move.factor](move.run, move.coef);
    const double saved = cell;
    cell = move.value;
    row_ = z_.row(move.run);
    assembly_->fill_row_for_factor(design_, move.run, move.factor, row_);
    cell = saved;
  }

  std::shared_ptr<const ModelAssembly> assembly_;
  CriterionSpec spec_;
  GlmFamily family_;
  std::shared_ptr<const QuadratureGrid> grid_;
  SpdKernel kernel_;
  Eigen::MatrixXd lr0_;
  Eigen::MatrixXd theta_t_;
  Design design_;
  Eigen::MatrixXd z_;
  Eigen::MatrixXd eta_;
  Eigen::MatrixXd weight_;
  std::vector<double> info_;  // B blocks of P x P information matrices
  Eigen::RowVectorXd row_;
  Eigen::VectorXd eta_row_;
};

/// Wraps a whole-design objective function; probes re-evaluate from scratch.
/// Meant for tests and small problems.
class FunctionObjective {
 public:
  FunctionObjective(std::function<double(const Design&)> fn, CriterionSpec spec)
      : fn_(std::move(fn)), spec_(spec) {}

  double initialize(const Design& start) {
    design_ = start;
    return fn_(design_);
  }

  double probe(const CoordMove& move) {
    auto& cell = design_.coef[move.factor](move.run, move.coef);
    const double saved = cell;
    cell = move.value;
    const double value = fn_(design_);
    cell = saved;
    return value;
  }

  double commit(const CoordMove& move) {
    design_.coef[move.factor](move.run, move.coef) = move.value;
    return fn_(design_);
  }

  const Design& design() const noexcept { return design_; }
  const CriterionSpec& criterion() const noexcept { return spec_; }

 private:
  std::function<double(const Design&)> fn_;
  CriterionSpec spec_;
  Design design_;
};

}  // namespace fdoe
