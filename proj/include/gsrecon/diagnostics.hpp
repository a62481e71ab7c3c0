#ifndef GSRECON_DIAGNOSTICS_HPP
#define GSRECON_DIAGNOSTICS_HPP

#include "gsrecon/fem.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace gsrecon {

/// Tangential-field probe on the wall: g = (1/r) dpsi/dn at `position`.
struct Probe {
  Point position = Point::Zero();
  Point normal = Point::UnitX();
  double g = 0.0;
};

/// Line of sight shared by interferometry (beta) and polarimetry (alpha).
struct Chord {
  Polyline points;
  double alpha = 0.0;
  double beta = 0.0;
};

/// MSE pitch angle: tan(gamma) = (a1 Br + a2 Bz + a3 Bphi) / (a4 Br + a5 Bz + a6 Bphi).
struct MsePoint {
  Point position = Point::Zero();
  std::array<double, 6> a{};
  double gamma = 0.0;
};

struct Globals {
  double Ip = 0.0;
  double f0 = 0.0;
  double R0 = 1.0;
};

struct MeasurementSet {
  Globals globals;
  /// Dirichlet flux per boundary node, in mesh boundary order.
  Eigen::VectorXd h;
  std::vector<Probe> probes;
  std::vector<Chord> chords;
  std::vector<MsePoint> mse;
};

enum class Block { Probe = 0, Polarimetry = 1, Interferometry = 2, Mse = 3, Current = 4 };
const char* to_string(Block b);

/// Quadrature sample on a chord; `normal` is the unit normal used for the
/// parallel field, B_par = (1/r) grad(psi) . normal.
struct ChordSample {
  int triangle;
  Eigen::Vector3d bary;
  Point p;
  double weight;
  Point normal;
};

/// Diagnostic positions resolved against one mesh; built once per run.
struct DiagnosticGeometry {
  std::vector<PointLocation> probes;
  std::vector<std::vector<ChordSample>> chords;
  std::vector<PointLocation> mse;
};

/// Locates probes, MSE points and chord quadrature samples (composite
/// 3-point Gauss with step at most half the mean edge length).
DiagnosticGeometry compile_geometry(const Mesh& mesh, const MeasurementSet& meas);

/// Affine map u -> rows * u + offset.
struct AffineRows {
  Eigen::MatrixXd rows;
  Eigen::VectorXd offset;
};

/// Vacuum lift: psi = h on the wall, K psi_int = -K_ib h.
Eigen::VectorXd lift_boundary(const Mesh& mesh, const StiffnessOperator& op, const Eigen::VectorXd& h);

/// Composes nodal functionals (columns of L) with psi(u) = psi_h + K^-1 D_int u
/// through one adjoint solve per functional.
AffineRows compose_with_flux(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& L,
                             const Eigen::MatrixXd& D, const Eigen::VectorXd& psi_h);

/// Nodal functionals (columns) of the probe model (1/r) grad(psi) . n.
Eigen::MatrixXd probe_functionals(const Mesh& mesh, const DiagnosticGeometry& geom, const MeasurementSet& meas);

AffineRows probe_rows(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& D,
                      const Eigen::VectorXd& psi_h, const DiagnosticGeometry& geom, const MeasurementSet& meas);

/// int_C n_e(psibar_n) dl on the n_e block, psibar lagged at flux_n.
AffineRows interferometry_rows(const Mesh& mesh, const FluxState& flux_n, const DiagnosticGeometry& geom,
                               const ProfileBasis& basis);

enum class PolarimetryLag {
  Density,  ///< n_e from the previous iterate; rows act on A, B
  Field     ///< poloidal field from flux_n; rows act on n_e
};

AffineRows polarimetry_rows(const Mesh& mesh, const StiffnessOperator& op, const FluxState& flux_n,
                            const ProfileSet& profiles_n, const Eigen::MatrixXd& D, const Eigen::VectorXd& psi_h,
                            const DiagnosticGeometry& geom, PolarimetryLag lag);

/// Tan-linearized MSE residual rows; targets are tan(gamma_i).
AffineRows mse_rows(const Mesh& mesh, const StiffnessOperator& op, const FluxState& flux_n, const ProfileSet& profiles_n,
                    const Eigen::MatrixXd& D, const Eigen::VectorXd& psi_h, const DiagnosticGeometry& geom,
                    const MeasurementSet& meas);

/// Total plasma current: column sums of the full current matrix.
AffineRows current_row(const Eigen::MatrixXd& D);

/// Weighted affine observation model C u + offset against targets k.
struct ObservationSystem {
  Eigen::MatrixXd C;
  Eigen::VectorXd offset;
  Eigen::VectorXd target;
  Eigen::VectorXd weight;
  std::vector<Block> blocks;

  int rows() const { return static_cast<int>(C.rows()); }
  void append(const AffineRows& r, const Eigen::VectorXd& k, double w, Block b);
  Eigen::VectorXd model(const Eigen::VectorXd& u) const { return C * u + offset; }
};

/// Nonlinear evaluation of every measurement on a given state.
struct ModelOutputs {
  Eigen::VectorXd h;
  Eigen::VectorXd g;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd mse;  ///< angles in radians
  double Ip = 0.0;
};

ModelOutputs evaluate_model(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                            const DiagnosticGeometry& geom, const MeasurementSet& meas);

/// Integral of j_phi over the plasma region.
double plasma_current(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles);

struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
  bool boundary = true;
  bool probes = true;
  bool chords = true;
  bool mse = true;
  bool current = true;
};

/// Multiplies every selected measurement by (1 + level * N(0, 1)), drawing
/// in the order h, g, (alpha, beta) per chord, MSE angles, I_p.
MeasurementSet perturb(MeasurementSet meas, const NoiseSpec& noise);

/// Measurements of a known state on the geometry of `geometry`, with
/// multiplicative Gaussian noise.
MeasurementSet synthesize(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                          const MeasurementSet& geometry, const NoiseSpec& noise = {});

/// Enclosed current estimated from the probes by Ampere's law around the
/// closed loop they trace (ordered by angle about their centroid); nullopt
/// with fewer than three probes.
std::optional<double> probe_enclosed_current(const MeasurementSet& meas);

/// Brings measurements written with flux decreasing toward the axis into the
/// axis-maximum convention: when the probe estimate of the enclosed current
/// has the opposite sign to I_p, negates h, g, alpha and the MSE coefficients
/// of B_r and B_z. Returns true if it flipped.
bool orient_flux_sign(MeasurementSet& meas);

/// Copy of the profile set carrying the axis and boundary flux of `flux`.
ProfileSet attach_flux(ProfileSet ps, const FluxState& flux);

}  // namespace gsrecon

#endif  // GSRECON_DIAGNOSTICS_HPP
