#include "gsrecon/profiles.hpp"

#include <cmath>

namespace gsrecon {

namespace {

// 4-point Gauss-Legendre on [0, 1]; exact through degree 7.
constexpr std::array<double, 4> kGaussX = {0.06943184420297371, 0.33000947820757187, 0.6699905217924281,
                                           0.9305681557970262};
constexpr std::array<double, 4> kGaussW = {0.17392742256872692, 0.3260725774312731, 0.3260725774312731,
                                           0.17392742256872692};

/// Distinct breakpoints of the knot vector.
std::vector<double> breakpoints(const BSplineBasisd& basis) {
  std::vector<double> b;
  for (double k : basis.knots())
    if (b.empty() || k > b.back()) b.push_back(k);
  return b;
}

}  // namespace

Eigen::VectorXd ProfileBasis::affine_coefficients(ProfileBlock b, double c0, double c1) const {
  Eigen::VectorXd g = block(b).greville();
  return (c0 + c1 * g.array()).matrix();
}

Eigen::MatrixXd regularization_gram(const BSplineBasisd& basis) {
  if (basis.degree() < 2) throw config_error("regularization needs spline degree >= 2");
  const int m = basis.size();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
  const auto bp = breakpoints(basis);
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double a = bp[s], h = bp[s + 1] - bp[s];
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
      const Eigen::VectorXd d2 = basis.evaluate(a + h * kGaussX[q], 2);
      S.noalias() += (h * kGaussW[q]) * d2 * d2.transpose();
    }
  }
  return 0.5 * (S + S.transpose());
}

Eigen::VectorXd tail_integrals(const BSplineBasisd& basis, double x) {
  if (x < 0.0 || x > 1.0) throw numeric_error("profile argument outside [0, 1]");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  const auto bp = breakpoints(basis);
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double a = std::max(bp[s], x), b = bp[s + 1];
    if (b <= a) continue;
    const double h = b - a;
    for (std::size_t q = 0; q < kGaussX.size(); ++q) out += (h * kGaussW[q]) * basis.evaluate(a + h * kGaussX[q]);
  }
  return out;
}

Eigen::MatrixXd regularization_matrix(const ProfileBasis& basis, double w_a, double w_b, double w_ne) {
  const int n = basis.total();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  const std::array<double, 3> w = {w_a, w_b, w_ne};
  for (int k = 0; k < 3; ++k) {
    const auto b = static_cast<ProfileBlock>(k);
    const int o = basis.offset(b), m = basis.count(b);
    L.block(o, o, m, m) = w[k] * regularization_gram(basis.block(b));
  }
  return L;
}

double roughness(const BSplineBasisd& basis, const Eigen::Ref<const Eigen::VectorXd>& c) {
  if (basis.degree() < 2) throw config_error("regularization needs spline degree >= 2");
  if (c.size() != basis.size()) throw config_error("coefficient count does not match the basis");
  double sum = 0.0;
  const auto bp = breakpoints(basis);
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double a = bp[s], h = bp[s + 1] - bp[s];
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
      const double d2 = basis.evaluate(a + h * kGaussX[q], 2).dot(c);
      sum += h * kGaussW[q] * d2 * d2;
    }
  }
  return sum;
}

double regularization_energy(const ProfileBasis& basis, const Eigen::VectorXd& u, double w_a, double w_b, double w_ne) {
  const double w[3] = {w_a, w_b, w_ne};
  double e = 0.0;
  for (auto b : {ProfileBlock::A, ProfileBlock::B, ProfileBlock::Ne})
    e += w[static_cast<int>(b)] * roughness(basis.block(b), u.segment(basis.offset(b), basis.count(b)));
  return e;
}

double ProfileSet::value(ProfileBlock b, double x) const {
  const auto& bs = basis.block(b);
  double vals[8];
  const int first = bs.nonzero_values(std::clamp(x, 0.0, 1.0), vals);
  const int o = basis.offset(b) + first;
  double s = 0.0;
  for (int j = 0; j <= bs.degree(); ++j) s += vals[j] * u[o + j];
  return s;
}

double ProfileSet::ne(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  return value(ProfileBlock::Ne, x);
}

double ProfileSet::pressure(double x) const {
  const double dpsi = psi_b - psi_axis;
  return -(dpsi / R0) * tail_integrals(basis.block(ProfileBlock::A), x).dot(coefficients(ProfileBlock::A));
}

double ProfileSet::pressure_slope(double x) const { return (psi_b - psi_axis) / R0 * A(x); }

double ProfileSet::f_squared(double x) const {
  const double dpsi = psi_b - psi_axis;
  const double f2 = f0 * f0 - 2.0 * kMu0 * R0 * dpsi *
                                  tail_integrals(basis.block(ProfileBlock::B), x).dot(coefficients(ProfileBlock::B));
  if (!(f2 > 0.0)) throw numeric_error("unphysical profile: f^2 <= 0 at normalized flux " + std::to_string(x));
  return f2;
}

double ProfileSet::f(double x) const { return std::copysign(std::sqrt(f_squared(x)), f0); }

double pressure_profile(const ProfileSet& ps, double x) { return ps.pressure(x); }
double f_squared_profile(const ProfileSet& ps, double x) { return ps.f_squared(x); }

}  // namespace gsrecon
