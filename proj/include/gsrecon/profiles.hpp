#ifndef GSRECON_PROFILES_HPP
#define GSRECON_PROFILES_HPP

#include "gsrecon/bspline.hpp"

namespace gsrecon {

enum class ProfileBlock { A = 0, B = 1, Ne = 2 };

/// Reduced basis for the three unknown functions of normalized flux:
/// A (pressure-gradient source), B (ff' source) and the electron density.
/// Coefficients are packed as [A | B | n_e].
class ProfileBasis {
 public:
  ProfileBasis() : ProfileBasis(3, 8, 8, 8) {}
  ProfileBasis(int degree, int count_a, int count_b, int count_ne)
      : blocks_{BSplineBasisd(degree, count_a), BSplineBasisd(degree, count_b), BSplineBasisd(degree, count_ne)} {}

  const BSplineBasisd& block(ProfileBlock b) const { return blocks_[static_cast<int>(b)]; }
  int count(ProfileBlock b) const { return block(b).size(); }
  int offset(ProfileBlock b) const {
    int o = 0;
    for (int i = 0; i < static_cast<int>(b); ++i) o += blocks_[i].size();
    return o;
  }
  int total() const { return blocks_[0].size() + blocks_[1].size() + blocks_[2].size(); }
  int degree() const { return blocks_[0].degree(); }

  /// Values of the basis functions of one block at x in [0, 1].
  Eigen::VectorXd eval_basis(ProfileBlock b, double x) const { return block(b).evaluate(x); }

  /// Coefficients reproducing the affine function c0 + c1 x exactly.
  Eigen::VectorXd affine_coefficients(ProfileBlock b, double c0, double c1) const;

 private:
  std::array<BSplineBasisd, 3> blocks_;
};

/// Second-derivative Gram matrix S_ij = int_0^1 N_i'' N_j'' dx, exact per span.
Eigen::MatrixXd regularization_gram(const BSplineBasisd& basis);

/// Integrals int_x^1 N_i(s) ds of every basis function, exact per span.
Eigen::VectorXd tail_integrals(const BSplineBasisd& basis, double x);

/// Block-diagonal Tikhonov matrix diag(w_A S_A, w_B S_B, w_ne S_ne).
Eigen::MatrixXd regularization_matrix(const ProfileBasis& basis, double w_a, double w_b, double w_ne);

/// int_0^1 s''(x)^2 dx for s = sum c_i N_i, by quadrature of s'' itself.
/// Equals c^T S c but keeps full relative accuracy near affine profiles.
double roughness(const BSplineBasisd& basis, const Eigen::Ref<const Eigen::VectorXd>& c);

/// u^T regularization_matrix(basis, w_a, w_b, w_ne) u, evaluated with roughness().
double regularization_energy(const ProfileBasis& basis, const Eigen::VectorXd& u, double w_a, double w_b, double w_ne);

/// Reconstructed (or prescribed) profile functions with the reference
/// scalars needed to turn A, B into p and f.
struct ProfileSet {
  ProfileBasis basis;
  Eigen::VectorXd u;
  double R0 = 1.0;
  double f0 = 1.0;
  double psi_axis = 1.0;
  double psi_b = 0.0;

  Eigen::Ref<const Eigen::VectorXd> coefficients(ProfileBlock b) const {
    return u.segment(basis.offset(b), basis.count(b));
  }
  double value(ProfileBlock b, double x) const;
  double A(double x) const { return value(ProfileBlock::A, x); }
  double B(double x) const { return value(ProfileBlock::B, x); }
  /// Electron density; zero outside [0, 1].
  double ne(double x) const;

  /// Pressure with p(1) = 0.
  double pressure(double x) const;
  /// f^2 with f(1) = f0; throws a numeric error if f^2 <= 0.
  double f_squared(double x) const;
  double f(double x) const;
  /// Derivative dp/dx of the pressure with respect to normalized flux.
  double pressure_slope(double x) const;
};

double pressure_profile(const ProfileSet& ps, double x);
double f_squared_profile(const ProfileSet& ps, double x);

}  // namespace gsrecon

#endif  // GSRECON_PROFILES_HPP
