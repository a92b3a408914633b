#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fdoe/calculus.hpp"
#include "fdoe/errors.hpp"
#include "fdoe/formula.hpp"

namespace fdoe {

/// Mutable view of a model-matrix row (rows of column-major storage are
/// strided).
using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

/// The optimization variable: one coefficient matrix per profile factor,
/// runs by basis dimension.
struct Design {
  std::vector<Eigen::MatrixXd> coef;

  int runs() const noexcept { return coef.empty() ? 0 : static_cast<int>(coef[0].rows()); }
  int factors() const noexcept { return static_cast<int>(coef.size()); }
};

inline void check_design_shape(const Design& design, const std::vector<BasisSpec>& factor_specs,
                               int n_runs) {
  if (design.factors() != static_cast<int>(factor_specs.size()))
    throw ConfigError("design has " + std::to_string(design.factors()) + " factors, expected " +
                      std::to_string(factor_specs.size()));
  for (std::size_t j = 0; j < factor_specs.size(); ++j) {
    const auto& m = design.coef[j];
    if (m.rows() != n_runs || m.cols() != factor_specs[j].dimension())
      throw ConfigError("design matrix for factor " + std::to_string(j + 1) + " is " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected " + std::to_string(n_runs) + "x" +
                        std::to_string(factor_specs[j].dimension()));
  }
}

inline void check_design_bounds(const Design& design, double lo, double hi) {
  for (std::size_t j = 0; j < design.coef.size(); ++j)
    if ((design.coef[j].array() < lo).any() || (design.coef[j].array() > hi).any())
      throw ConfigError("design coordinates for factor " + std::to_string(j + 1) +
                        " fall outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

/// Everything about a model that does not depend on the design: the per-term
/// Gram integrals, the block-diagonal curvature penalty, and the Z layout.
/// Immutable after construction and safe to share across search workers.
class ModelAssembly {
 public:
  ModelAssembly(TermList terms, std::vector<BasisSpec> factor_specs)
      : terms_(std::move(terms)), fspecs_(std::move(factor_specs)) {
    const int p = terms_.P();
    r0_ = Eigen::MatrixXd::Zero(p, p);
    terms_of_factor_.assign(fspecs_.size(), {});
    for (int q = 0; q < terms_.Q(); ++q) {
      const BoundTerm& term = terms_.terms[q];
      gram_.push_back(term_gram(term));
      r0_.block(term.col_offset, term.col_offset, term.nbeta, term.nbeta) =
          roughness_matrix(term.param_basis);
      for (int j : term.factors)
        if (terms_of_factor_[j].empty() || terms_of_factor_[j].back() != q)
          terms_of_factor_[j].push_back(q);
    }
  }

  const TermList& terms() const noexcept { return terms_; }
  const std::vector<BasisSpec>& factor_specs() const noexcept { return fspecs_; }
  int P() const noexcept { return terms_.P(); }
  const Eigen::MatrixXd& roughness() const noexcept { return r0_; }
  const Eigen::MatrixXd& gram(int q) const { return gram_[q]; }

  /// Model matrix Z (runs x P); block q of row i contracts run i's factor
  /// coefficients (their Kronecker product for interactions and polynomials)
  /// with the term's Gram matrix.
  Eigen::MatrixXd model_matrix(const Design& design) const {
    check_design_shape(design, fspecs_, design.runs());
    Eigen::MatrixXd z(design.runs(), P());
    for (int i = 0; i < design.runs(); ++i) {
      auto row = z.row(i);
      for (int q = 0; q < terms_.Q(); ++q) fill_block(design, i, q, row);
    }
    return z;
  }

  /// Recompute the row-i blocks of every term that involves `factor`,
  /// leaving the other blocks of `row` untouched.
  void fill_row_for_factor(const Design& design, int run, int factor, RowRef row) const {
    for (int q : terms_of_factor_[factor]) fill_block(design, run, q, row);
  }

  /// Profile-factor functions on a time grid: entry (i, k) is
  /// x_ij(grid[k]) built from run i's coefficients.
  Eigen::MatrixXd profile_eval(const Design& design, int factor,
                               const std::vector<double>& grid) const {
    const BasisSpec& spec = fspecs_.at(factor);
    Eigen::MatrixXd values(design.runs(), grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
      values.col(k) = design.coef[factor] * spec.eval(grid[k]);
    return values;
  }

 private:
  Eigen::MatrixXd term_gram(const BoundTerm& term) const {
    switch (term.kind) {
      case TermKind::intercept: {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = term.param_basis.tmax() - term.param_basis.tmin();
        return g;
      }
      case TermKind::main:
        return cross_gram(fspecs_[term.factors[0]], term.param_basis);
      case TermKind::interaction:
        return product_gram({fspecs_[term.factors[0]], fspecs_[term.factors[1]]},
                            term.param_basis);
      case TermKind::polynomial: {
        std::vector<BasisSpec> copies(term.poly_degree, fspecs_[term.factors[0]]);
        return product_gram(copies, term.param_basis);
      }
    }
    throw std::logic_error("unreachable");
  }

  void fill_block(const Design& design, int run, int q, RowRef row) const {
    const BoundTerm& term = terms_.terms[q];
    auto block = row.segment(term.col_offset, term.nbeta);
    switch (term.kind) {
      case TermKind::intercept:
        block[0] = gram_[q](0, 0);
        break;
      case TermKind::main:
        block.noalias() = design.coef[term.factors[0]].row(run) * gram_[q];
        break;
      case TermKind::interaction: {
        const auto a = design.coef[term.factors[0]].row(run);
        const auto b = design.coef[term.factors[1]].row(run);
        Eigen::RowVectorXd kron(a.size() * b.size());
        for (int u = 0; u < a.size(); ++u)
          kron.segment(u * b.size(), b.size()) = a[u] * b;
        block.noalias() = kron * gram_[q];
        break;
      }
      case TermKind::polynomial: {
        const auto a = design.coef[term.factors[0]].row(run);
        Eigen::RowVectorXd kron = a;
        for (int rep = 1; rep < term.poly_degree; ++rep) {
          Eigen::RowVectorXd next(kron.size() * a.size());
          for (int u = 0; u < kron.size(); ++u)
            next.segment(u * a.size(), a.size()) = kron[u] * a;
          kron.swap(next);
        }
        block.noalias() = kron * gram_[q];
        break;
      }
    }
  }

  TermList terms_;
  std::vector<BasisSpec> fspecs_;
  std::vector<Eigen::MatrixXd> gram_;
  Eigen::MatrixXd r0_;
  std::vector<std::vector<int>> terms_of_factor_;
};

}  // namespace fdoe
