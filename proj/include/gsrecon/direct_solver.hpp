#ifndef GSRECON_DIRECT_SOLVER_HPP
#define GSRECON_DIRECT_SOLVER_HPP

#include "gsrecon/diagnostics.hpp"

#include <optional>

namespace gsrecon {

/// Fixed-boundary problem with prescribed source functions.
struct ForwardProblem {
  std::function<double(double)> A;
  std::function<double(double)> B;
  Eigen::VectorXd h;
  double R0 = 1.0;
  /// When set, the source amplitude is rescaled every iteration so the
  /// plasma current matches.
  std::optional<double> Ip;
  /// Starting flux; a seed current is used when empty.
  std::optional<Eigen::VectorXd> initial_psi;
};

struct ForwardConfig {
  double tolerance = 1e-10;
  int max_iterations = 200;
};

struct ForwardResult {
  FluxState flux;
  /// Factor applied to A and B (1 without current rescaling).
  double scale = 1.0;
  int iterations = 0;
  bool relaxed = false;
};

ForwardResult solve_forward(const Mesh& mesh, const StiffnessOperator& op, const ForwardProblem& problem,
                            const ForwardConfig& cfg = {});
ForwardResult solve_forward(const Mesh& mesh, const ForwardProblem& problem, const ForwardConfig& cfg = {});

/// Spline truth solved to self-consistency: the problem uses the A and B
/// blocks of `truth`, and the returned profiles carry the current-matching
/// scale and the final axis and boundary flux.
struct ForwardCase {
  ForwardResult forward;
  ProfileSet truth;
};

ForwardCase solve_forward_profiles(const Mesh& mesh, const StiffnessOperator& op, const ProfileSet& truth,
                                   const Eigen::VectorXd& h, std::optional<double> Ip, const ForwardConfig& cfg = {});

/// Measurements of a forward state on the given diagnostic geometry; h is
/// the forward flux on the boundary nodes.
MeasurementSet export_case(const Mesh& mesh, const FluxState& flux, const ProfileSet& truth,
                           const MeasurementSet& geometry, const NoiseSpec& noise = {});

}  // namespace gsrecon

#endif  // GSRECON_DIRECT_SOLVER_HPP
