#include "gsrecon/direct_solver.hpp"

#include <cmath>

namespace gsrecon {

ForwardResult solve_forward(const Mesh& mesh, const StiffnessOperator& op, const ForwardProblem& problem,
                            const ForwardConfig& cfg) {
  if (!problem.A || !problem.B) throw config_error("forward problem needs both source functions");
  if (problem.h.size() != mesh.num_boundary()) throw config_error("boundary data size does not match the mesh");

  ForwardResult res;
  if (problem.initial_psi) {
    res.flux = analyze_flux(mesh, *problem.initial_psi);
  } else {
    const double guess = problem.Ip ? *problem.Ip
                                    : 0.3 * mesh.total_area() * (std::abs(problem.A(0.5)) + std::abs(problem.B(0.5)));
    if (guess > 0.0)
      res.flux = seed_flux(mesh, op, problem.h, guess);
    else
      res.flux = analyze_flux(mesh, solve_with_dirichlet(mesh, op, Eigen::VectorXd::Zero(mesh.num_interior()), problem.h));
  }

  double prev = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Eigen::VectorXd load = assemble_load(mesh, res.flux, problem.A, problem.B, problem.R0);
    if (problem.Ip) {
      const double total = load.sum();
      if (!(total > 0.0)) throw numeric_error("prescribed sources give no positive plasma current");
      res.scale = *problem.Ip / total;
      load *= res.scale;
    }
    Eigen::VectorXd psi = solve_with_dirichlet(mesh, op, restrict_to_interior(mesh, load), problem.h);
    if (res.relaxed) psi = 0.5 * (psi + res.flux.psi);
    FluxState next = analyze_flux(mesh, std::move(psi));
    const double change = relative_change(next, res.flux.psi);
    res.flux = std::move(next);
    res.iterations = it;
    if (change < cfg.tolerance) return res;
    growing = change > prev ? growing + 1 : 0;
    if (growing >= 2 && !res.relaxed) {
      res.relaxed = true;
      growing = 0;
    }
    prev = change;
  }
  throw numeric_error("forward solve did not converge in " + std::to_string(cfg.max_iterations) + " iterations");
}

ForwardResult solve_forward(const Mesh& mesh, const ForwardProblem& problem, const ForwardConfig& cfg) {
  return solve_forward(mesh, assemble_stiffness(mesh), problem, cfg);
}

ForwardCase solve_forward_profiles(const Mesh& mesh, const StiffnessOperator& op, const ProfileSet& truth,
                                   const Eigen::VectorXd& h, std::optional<double> Ip, const ForwardConfig& cfg) {
  ForwardProblem p;
  p.A = [&truth](double x) { return truth.A(x); };
  p.B = [&truth](double x) { return truth.B(x); };
  p.h = h;
  p.R0 = truth.R0;
  p.Ip = Ip;
  ForwardCase out{solve_forward(mesh, op, p, cfg), truth};
  const ProfileBasis& b = truth.basis;
  const int n = b.count(ProfileBlock::A) + b.count(ProfileBlock::B);
  out.truth.u.segment(b.offset(ProfileBlock::A), n) *= out.forward.scale;
  out.truth = attach_flux(out.truth, out.forward.flux);
  return out;
}

MeasurementSet export_case(const Mesh& mesh, const FluxState& flux, const ProfileSet& truth,
                           const MeasurementSet& geometry, const NoiseSpec& noise) {
  return synthesize(mesh, flux, truth, geometry, noise);
}

}  // namespace gsrecon
