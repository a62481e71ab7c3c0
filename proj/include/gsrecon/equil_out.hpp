#ifndef GSRECON_EQUIL_OUT_HPP
#define GSRECON_EQUIL_OUT_HPP

#include "gsrecon/profiles.hpp"
#include "gsrecon/plasma.hpp"

#include <optional>

namespace gsrecon {

/// j_phi = (r/R0) A(psibar) + (R0/r) B(psibar) inside the plasma, 0 outside.
double current_density(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps, const Point& p);

/// (f / 2 pi) times the loop integral of dl / (r |grad psi|) on a closed
/// contour, with the P1 gradient of each segment's triangle. Segments closed
/// through the X-point are skipped.
double safety_factor_on(const Mesh& mesh, const FluxState& flux, const Contour& contour, double f);

/// q on each level in (0, 1]; level 1 uses the stored boundary contour.
std::vector<double> q_profile(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps,
                              const std::vector<double>& levels);

/// Linear extrapolation to the axis from the two innermost levels.
double q_on_axis(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps, double first_level = 0.05,
                 double second_level = 0.1);

struct DerivedScalars {
  double Ip = 0.0;
  double area = 0.0;
  double volume = 0.0;
  double perimeter = 0.0;
  double beta_p = 0.0;
  double l_i = 0.0;
  double beta_p_plus_li_over_2 = 0.0;
  std::optional<double> R_x;
  std::optional<double> Z_x;
  double R_axis = 0.0;
  double Z_axis = 0.0;
  double shafranov_shift = 0.0;
  double triangularity_upper = 0.0;
  double triangularity_lower = 0.0;
  double elongation = 0.0;
  double q_axis = 0.0;
  double q95 = 0.0;
  double psi_axis = 0.0;
  double psi_b = 0.0;
  std::string boundary_kind;
};

/// Volume = 2 pi int r dA; B_pa = mu0 Ip / perimeter; beta_p = 2 mu0 <p>_V / B_pa^2;
/// l_i = <|grad psi|^2 / r^2>_V / B_pa^2; shift and triangularity from the
/// boundary contour.
DerivedScalars global_scalars(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps);

/// Tabulated profiles on a uniform grid of normalized flux.
struct ProfileTable {
  std::vector<double> x, A, B, ne, p, f, f2, q;
};

ProfileTable profile_table(const Mesh& mesh, const FluxState& flux, const ProfileSet& ps, int points = 21);

}  // namespace gsrecon

#endif  // GSRECON_EQUIL_OUT_HPP
