#ifndef GSRECON_BSPLINE_HPP
#define GSRECON_BSPLINE_HPP

#include "gsrecon/core.hpp"

#include <algorithm>
#include <vector>

namespace gsrecon {

/// Clamped B-spline basis on [0, 1] with uniform interior knots.
///
/// Evaluation follows the usual triangular recurrence over the degree + 1
/// functions that are nonzero on a knot span; derivatives use the
/// difference form of the same table.
template <typename Scalar>
class BSplineBasis {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BSplineBasis() = default;
  BSplineBasis(int degree, int count) : degree_(degree), count_(count) {
    if (degree < 1 || degree > 7 || count < degree + 1)
      throw config_error("B-spline basis needs 1 <= degree <= 7 and count >= degree + 1");
    const int interior = count - degree - 1;
    knots_.assign(degree + 1, Scalar(0));
    for (int i = 1; i <= interior; ++i) knots_.push_back(Scalar(i) / Scalar(interior + 1));
    knots_.insert(knots_.end(), degree + 1, Scalar(1));
  }

  int degree() const { return degree_; }
  int size() const { return count_; }
  const std::vector<Scalar>& knots() const { return knots_; }

  /// Index of the knot span containing x (the last span for x = 1).
  int span(Scalar x) const {
    if (x >= knots_[count_]) return count_ - 1;
    if (x <= knots_[degree_]) return degree_;
    const auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + count_ + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  /// Values (row 0) and derivatives up to order n (rows 1..n) of the
  /// degree + 1 functions nonzero on the span of x. Column j belongs to
  /// basis function span - degree + j.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> local_derivatives(Scalar x, int n, int* span_out) const {
    const int p = degree_;
    const int s = span(x);
    if (span_out) *span_out = s;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ndu(p + 1, p + 1);
    std::vector<Scalar> left(p + 1), right(p + 1);
    ndu(0, 0) = Scalar(1);
    for (int j = 1; j <= p; ++j) {
      left[j] = x - knots_[s + 1 - j];
      right[j] = knots_[s + j] - x;
      Scalar saved(0);
      for (int r = 0; r < j; ++r) {
        ndu(j, r) = right[r + 1] + left[j - r];
        const Scalar temp = ndu(r, j - 1) / ndu(j, r);
        ndu(r, j) = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu(j, j) = saved;
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ders =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n + 1, p + 1);
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
    Eigen::Matrix<Scalar, 2, Eigen::Dynamic> a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
      int s1 = 0, s2 = 1;
      a(0, 0) = Scalar(1);
      for (int k = 1; k <= n; ++k) {
        Scalar d(0);
        const int rk = r - k, pk = p - k;
        if (r >= k) {
          a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
          d = a(s2, 0) * ndu(rk, pk);
        }
        const int j1 = (rk >= -1) ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
          d += a(s2, j) * ndu(rk + j, pk);
        }
        if (r <= pk) {
          a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
          d += a(s2, k) * ndu(r, pk);
        }
        ders(k, r) = d;
        std::swap(s1, s2);
      }
    }
    Scalar factor(p);
    for (int k = 1; k <= n; ++k) {
      ders.row(k) *= factor;
      factor *= Scalar(p - k);
    }
    return ders;
  }

  /// Allocation-free values of the degree + 1 functions nonzero at x; returns
  /// the index of the first of them. Requires degree <= 7.
  int nonzero_values(Scalar x, Scalar* out) const {
    const int p = degree_;
    const int s = span(x);
    Scalar left[8], right[8];
    out[0] = Scalar(1);
    for (int j = 1; j <= p; ++j) {
      left[j] = x - knots_[s + 1 - j];
      right[j] = knots_[s + j] - x;
      Scalar saved(0);
      for (int r = 0; r < j; ++r) {
        const Scalar temp = out[r] / (right[r + 1] + left[j - r]);
        out[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      out[j] = saved;
    }
    return s - p;
  }

  /// All basis values (order = 0) or derivatives of the given order at x.
  Vector evaluate(Scalar x, int order = 0) const {
    if (x < Scalar(0) || x > Scalar(1)) throw numeric_error("B-spline argument outside [0, 1]");
    Vector out = Vector::Zero(count_);
    if (order > degree_) return out;
    int s = 0;
    const auto d = local_derivatives(x, order, &s);
    for (int j = 0; j <= degree_; ++j) out[s - degree_ + j] = d(order, j);
    return out;
  }

  /// Greville abscissae; coefficients of an affine function are its values there.
  Vector greville() const {
    Vector g(count_);
    for (int i = 0; i < count_; ++i) {
      Scalar s(0);
      for (int k = 1; k <= degree_; ++k) s += knots_[i + k];
      g[i] = s / Scalar(degree_);
    }
    return g;
  }

 private:
  int degree_ = 3;
  int count_ = 0;
  std::vector<Scalar> knots_;
};

using BSplineBasisd = BSplineBasis<double>;

}  // namespace gsrecon

#endif  // GSRECON_BSPLINE_HPP
