#ifndef GSRECON_CASES_HPP
#define GSRECON_CASES_HPP

#include "gsrecon/direct_solver.hpp"

namespace gsrecon {

/// Poloidal flux per radian of a circular filament of current I at (rc, zc).
double loop_flux(double rc, double zc, double current, const Point& p);

/// L2 norm over the mesh of (psi_h - exact), with the 3-point triangle rule.
double l2_error(const Mesh& mesh, const Eigen::VectorXd& psi_h, const std::function<double(const Point&)>& exact);

/// Closed-form equilibrium with constant sources:
/// psi = psi_axis - (mu0 A / (8 R0)) (r^2 - R0^2)^2 - (mu0 R0 B / 2) z^2.
/// The domain is its zero level line.
struct Soloviev {
  double R0 = 2.0;
  double A = 1.0e6;
  double B = 5.0e5;
  double psi_axis = 0.45;
  double f0 = 4.0;

  double psi(const Point& p) const;
  Eigen::Vector2d gradient(const Point& p) const;
  Polyline boundary(int points = 400) const;
  Mesh mesh(double target_h) const;
  Eigen::VectorXd boundary_values(const Mesh& mesh) const;
  /// Constant A and B; n_e = n0 (1 - psibar).
  ProfileSet profiles(const ProfileBasis& basis = {}, double n0 = 5e19) const;
};

struct Coil {
  double r, z, current;
};

enum class ProfileShape { Monotonic, ReversedShear };

ProfileShape parse_profile_shape(const std::string& s);
const char* to_string(ProfileShape s);

/// Spline truth profiles (before current normalization). Monotonic: A and B
/// proportional to (1 - x). Reversed shear: hollow B peaking near x = 1/3.
ProfileSet make_profiles(ProfileShape shape, const ProfileBasis& basis, double R0, double f0, double n0 = 5e19);

/// Probes on evenly spaced boundary nodes, straight chords across the
/// bounding box and MSE points along the horizontal line through `axis_guess`.
MeasurementSet default_diagnostics(const Mesh& mesh, const Point& axis_guess, int probes = 40, int chords_per_direction = 4,
                                   int mse_points = 10);

/// D-shaped vessel with a divertor coil below it.
struct ReferenceMachine {
  double R0 = 2.95;
  double Ip = 2.0e6;
  double f0 = 2.95 * 3.0;
  std::vector<Coil> coils{{3.0, 0.25, 2.0e6}, {2.8, -2.6, 1.2e6}};
  /// Uniform vertical field (tesla) added as flux Bv r^2 / 2.
  double vertical_field = -0.2;

  Polyline vessel(int points = 400) const;
  Mesh mesh(double target_h) const;
  /// Coil flux on the boundary nodes.
  Eigen::VectorXd boundary_flux(const Mesh& mesh) const;
};

/// A complete synthetic case: mesh, truth state and matching measurements.
struct SyntheticCase {
  std::shared_ptr<const Mesh> mesh;
  StiffnessOperator op;
  FluxState flux;
  ProfileSet truth;
  MeasurementSet measurements;
};

/// Forward solve of the reference machine with the given profile shape, the A
/// block scaled by `a_scale`, then noiseless measurements.
SyntheticCase reference_case(std::shared_ptr<const Mesh> mesh, ProfileShape shape, double a_scale = 1.0,
                             const ProfileBasis& basis = {});

/// Forward Soloviev solve (analytic boundary values) with measurements.
SyntheticCase soloviev_case(const Soloviev& s, double target_h, const ProfileBasis& basis = {});

}  // namespace gsrecon

#endif  // GSRECON_CASES_HPP
