#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fdoe {

enum class BasisFamily { bspline, power };

/// A polynomial basis family over a time interval [t0, T]: clamped B-splines
/// with simple interior knots, or the power (monomial) basis. A scalar factor
/// or parameter is the degenerate degree-0 case whose single basis function
/// is constantly one.
class BasisSpec {
 public:
  BasisSpec(BasisFamily family, int degree, std::vector<double> interior_knots,
            std::pair<double, double> tbounds = {0.0, 1.0})
      : family_(family),
        degree_(degree),
        knots_(std::move(interior_knots)),
        tmin_(tbounds.first),
        tmax_(tbounds.second) {
    validate();
    if (family_ == BasisFamily::bspline) build_extended_knots();
  }

  static BasisSpec bspline(int degree, std::vector<double> interior_knots,
                           std::pair<double, double> tbounds = {0.0, 1.0}) {
    return BasisSpec(BasisFamily::bspline, degree, std::move(interior_knots), tbounds);
  }

  static BasisSpec power(int degree, std::pair<double, double> tbounds = {0.0, 1.0}) {
    return BasisSpec(BasisFamily::power, degree, {}, tbounds);
  }

  /// The single constant basis function used for scalar factors, scalar
  /// parameters, and the intercept.
  static BasisSpec constant(std::pair<double, double> tbounds = {0.0, 1.0}) {
    return BasisSpec(BasisFamily::power, 0, {}, tbounds);
  }

  BasisFamily family() const noexcept { return family_; }
  int degree() const noexcept { return degree_; }
  const std::vector<double>& interior_knots() const noexcept { return knots_; }
  double tmin() const noexcept { return tmin_; }
  double tmax() const noexcept { return tmax_; }
  std::pair<double, double> tbounds() const noexcept { return {tmin_, tmax_}; }

  bool same_tbounds(const BasisSpec& other) const noexcept {
    return tmin_ == other.tmin_ && tmax_ == other.tmax_;
  }

  /// Number of basis functions: degree + #knots + 1 for B-splines,
  /// degree + 1 for the power basis.
  int dimension() const noexcept {
    int dim = degree_ + 1;
    if (family_ == BasisFamily::bspline) dim += static_cast<int>(knots_.size());
    return dim;
  }

  /// Span boundaries {t0} + interior knots + {T}; the basis functions are
  /// single polynomials between consecutive entries.
  std::vector<double> breakpoints() const {
    std::vector<double> pts;
    pts.reserve(knots_.size() + 2);
    pts.push_back(tmin_);
    if (family_ == BasisFamily::bspline)
      pts.insert(pts.end(), knots_.begin(), knots_.end());
    pts.push_back(tmax_);
    return pts;
  }

  /// All basis function values at t. Throws std::domain_error outside [t0, T].
  /// At t = T the B-spline basis follows the right-closed convention, so the
  /// last basis function evaluates to 1.
  Eigen::VectorXd eval(double t) const {
    check_domain(t);
    Eigen::VectorXd out(dimension());
    if (family_ == BasisFamily::power) {
      double p = 1.0;
      for (int v = 0; v <= degree_; ++v) {
        out[v] = p;
        p *= t;
      }
    } else {
      for (int i = 0; i < dimension(); ++i) out[i] = cox_de_boor(i, degree_, t);
    }
    return out;
  }

  /// order-th derivative of every basis function at t; the zero vector once
  /// order exceeds the degree.
  Eigen::VectorXd eval_deriv(double t, int order) const {
    if (order < 0) throw std::invalid_argument("eval_deriv: negative order");
    if (order == 0) return eval(t);
    check_domain(t);
    Eigen::VectorXd out(dimension());
    if (family_ == BasisFamily::power) {
      for (int v = 0; v <= degree_; ++v) {
        if (v < order) {
          out[v] = 0.0;
        } else {
          double coef = 1.0;
          for (int k = 0; k < order; ++k) coef *= v - k;
          out[v] = coef * std::pow(t, v - order);
        }
      }
    } else {
      for (int i = 0; i < dimension(); ++i) out[i] = deriv_rec(i, degree_, t, order);
    }
    return out;
  }

 private:
  void validate() const {
    if (degree_ < 0) throw std::invalid_argument("basis degree must be non-negative");
    if (!(tmax_ > tmin_)) throw std::invalid_argument("time bounds must satisfy t0 < T");
    if (family_ == BasisFamily::power && !knots_.empty())
      throw std::invalid_argument("power basis takes no interior knots");
    double prev = tmin_;
    for (double k : knots_) {
      if (!(k > prev))
        throw std::invalid_argument(
            k == prev ? "interior knots must be strictly increasing (multiplicity > 1 rejected)"
                      : "interior knots must be strictly increasing and inside (t0, T)");
      prev = k;
    }
    if (!knots_.empty() && !(knots_.back() < tmax_))
      throw std::invalid_argument("interior knots must lie strictly inside (t0, T)");
  }

  void build_extended_knots() {
    ext_.assign(degree_ + 1, tmin_);
    ext_.insert(ext_.end(), knots_.begin(), knots_.end());
    ext_.insert(ext_.end(), degree_ + 1, tmax_);
  }

  void check_domain(double t) const {
    if (!(t >= tmin_ && t <= tmax_))
      throw std::domain_error("basis evaluated at t = " + std::to_string(t) +
                              " outside [" + std::to_string(tmin_) + ", " +
                              std::to_string(tmax_) + "]");
  }

  // Degree-0 indicator of [ext_[i], ext_[i+1]), closed on the right for the
  // final span so the basis covers t = T.
  double indicator(std::size_t i, double t) const {
    const double lo = ext_[i], hi = ext_[i + 1];
    if (lo == hi) return 0.0;
    if (t >= lo && t < hi) return 1.0;
    return (hi == tmax_ && t == tmax_) ? 1.0 : 0.0;
  }

  double cox_de_boor(std::size_t i, int p, double t) const {
    if (p == 0) return indicator(i, t);
    double value = 0.0;
    const double d1 = ext_[i + p] - ext_[i];
    if (d1 > 0.0) value += (t - ext_[i]) / d1 * cox_de_boor(i, p - 1, t);
    const double d2 = ext_[i + p + 1] - ext_[i + 1];
    if (d2 > 0.0) value += (ext_[i + p + 1] - t) / d2 * cox_de_boor(i + 1, p - 1, t);
    return value;
  }

  double deriv_rec(std::size_t i, int p, double t, int order) const {
    if (order == 0) return cox_de_boor(i, p, t);
    if (p == 0) return 0.0;
    double value = 0.0;
    const double d1 = ext_[i + p] - ext_[i];
    if (d1 > 0.0) value += deriv_rec(i, p - 1, t, order - 1) / d1;
    const double d2 = ext_[i + p + 1] - ext_[i + 1];
    if (d2 > 0.0) value -= deriv_rec(i + 1, p - 1, t, order - 1) / d2;
    return p * value;
  }

  BasisFamily family_;
  int degree_;
  std::vector<double> knots_;
  double tmin_, tmax_;
  std::vector<double> ext_;  // clamped knot vector (bspline only)
};

}  // namespace fdoe
