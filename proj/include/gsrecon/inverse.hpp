#ifndef GSRECON_INVERSE_HPP
#define GSRECON_INVERSE_HPP

#include "gsrecon/diagnostics.hpp"

#include <optional>

namespace gsrecon {

/// Magnetics only (M) or magnetics plus internal measurements (J).
enum class ReconMode { M, J };

const char* to_string(ReconMode mode);
ReconMode parse_mode(const std::string& s);

struct SolverConfig {
  ReconMode mode = ReconMode::J;
  double K_probe = 1.0;
  double K_polarimetry = 1.0;
  double K_interferometry = 1.0;
  double K_mse = 1.0;
  double K_Ip = 1e3;
  double eps_a = 3e-4;
  double eps_b = 3e-4;
  double eps_ne = 3e-4;
  int max_iterations = 50;
  int rt_iterations = 2;
  double tolerance = 1e-4;
  int degree = 3;
  int count_a = 8;
  int count_b = 8;
  int count_ne = 8;
  bool use_polarimetry = true;
  bool use_interferometry = true;
  bool use_mse = true;
  /// Keep psi and u of every iteration in the trace.
  bool record_states = false;

  /// Throws a config error on negative weights or counts out of range.
  void validate() const;
  ProfileBasis basis() const { return ProfileBasis(degree, count_a, count_b, count_ne); }
  bool polarimetry_active() const { return mode == ReconMode::J && use_polarimetry && K_polarimetry > 0.0; }
  bool interferometry_active() const { return mode == ReconMode::J && use_interferometry && K_interferometry > 0.0; }
  bool mse_active() const { return mode == ReconMode::J && use_mse && K_mse > 0.0; }
};

/// Block scales used to nondimensionalize the residuals and the
/// regularization; fixed for one reconstruction.
struct CostScales {
  std::array<double, 5> block{1.0, 1.0, 1.0, 1.0, 1.0};  ///< indexed by Block
  double j_ref = 1.0;
  double n_ref = 1.0;
};

struct IterationRecord {
  /// Raw squared misfits: probes, polarimetry, interferometry, MSE angle, I_p.
  double J0 = 0.0, J1 = 0.0, J2 = 0.0, J3 = 0.0, J_Ip = 0.0;
  /// Weighted curvature energy of the profiles (equals u^T Lambda u).
  double J_eps = 0.0;
  /// Weighted sum of the nondimensionalized misfits plus J_eps.
  double total = 0.0;
  double change = 0.0;
  double u_norm = 0.0;
  double psi_axis = 0.0;
  double psi_b = 0.0;
  double seconds = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  CostScales scales;
  std::vector<Eigen::VectorXd> psi;
  std::vector<Eigen::VectorXd> u;

  int size() const { return static_cast<int>(records.size()); }
};

struct ReconstructionResult {
  FluxState flux;
  ProfileSet profiles;
  IterationTrace trace;
  bool converged = false;
  std::vector<std::string> warnings;
  double seconds = 0.0;
  /// Set in sequence mode when the frame failed and was replaced by a cold start.
  std::string error;
};

/// Problem-wide context shared across iterations and frames.
struct InverseContext {
  const Mesh* mesh = nullptr;
  StiffnessOperator op;
  ProfileBasis basis;
};

InverseContext make_context(const Mesh& mesh, const SolverConfig& cfg);

/// argmin (C u + c0 - k)^T W (C u + c0 - k) + u^T Lambda u via the normal
/// equations; throws a numeric error when the normal matrix is singular.
Eigen::VectorXd solve_least_squares(const ObservationSystem& obs, const Eigen::MatrixXd& Lambda);

/// Block-diagonal regularization with the A and B blocks scaled by 1/j_ref^2
/// and the density block by 1/n_ref^2.
Eigen::MatrixXd scaled_regularization(const ProfileBasis& basis, const SolverConfig& cfg, const CostScales& s);

CostScales cost_scales(const Mesh& mesh, const MeasurementSet& meas);

/// psi_{n+1} = K^-1 (D(psi_n) u + lift(h)) on every node.
Eigen::VectorXd picard_flux(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& D,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& h);

/// picard_flux followed by topology analysis.
FluxState picard_update(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& h);

/// Cost components of a state evaluated without linearization.
IterationRecord evaluate_cost(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                              const DiagnosticGeometry& geom, const MeasurementSet& meas, const SolverConfig& cfg,
                              const CostScales& scales);

struct WarmStart {
  FluxState flux;
  ProfileSet profiles;
};

/// Offline reconstruction: iterates until the relative change drops below
/// cfg.tolerance or cfg.max_iterations is reached. With `fixed_iterations`
/// exactly that many iterations run.
ReconstructionResult reconstruct(const InverseContext& ctx, const MeasurementSet& meas, const SolverConfig& cfg,
                                 const std::optional<WarmStart>& warm = std::nullopt,
                                 std::optional<int> fixed_iterations = std::nullopt);

ReconstructionResult reconstruct(const Mesh& mesh, const MeasurementSet& meas, const SolverConfig& cfg,
                                 const std::optional<WarmStart>& warm = std::nullopt);

/// Frame-by-frame reconstruction: the first frame (and any frame after a
/// failure) is solved offline from a cold start, every other frame runs
/// exactly cfg.rt_iterations warm-started iterations.
std::vector<ReconstructionResult> reconstruct_sequence(const Mesh& mesh, const std::vector<MeasurementSet>& frames,
                                                       const SolverConfig& cfg);

}  // namespace gsrecon

#endif  // GSRECON_INVERSE_HPP
