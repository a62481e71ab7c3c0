#include "gsrecon/inverse.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace gsrecon {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rms(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

double scale_or_one(double s) { return s > 0.0 && std::isfinite(s) ? s : 1.0; }

// Lower bound on the MSE block scale (tan of about 3 degrees).
constexpr double kMseScaleFloor = 0.05;

Eigen::VectorXd probe_targets(const MeasurementSet& m) {
  Eigen::VectorXd k(m.probes.size());
  for (std::size_t i = 0; i < m.probes.size(); ++i) k[i] = m.probes[i].g;
  return k;
}

Eigen::VectorXd alpha_targets(const MeasurementSet& m) {
  Eigen::VectorXd k(m.chords.size());
  for (std::size_t i = 0; i < m.chords.size(); ++i) k[i] = m.chords[i].alpha;
  return k;
}

Eigen::VectorXd beta_targets(const MeasurementSet& m) {
  Eigen::VectorXd k(m.chords.size());
  for (std::size_t i = 0; i < m.chords.size(); ++i) k[i] = m.chords[i].beta;
  return k;
}

Eigen::VectorXd gamma_targets(const MeasurementSet& m) {
  Eigen::VectorXd k(m.mse.size());
  for (std::size_t i = 0; i < m.mse.size(); ++i) k[i] = m.mse[i].gamma;
  return k;
}

double block_weight(double K, const CostScales& s, Block b) {
  const double sc = s.block[static_cast<int>(b)];
  return K / (sc * sc);
}

// Restriction of an observation system and regularization to a column range.
Eigen::VectorXd solve_columns(const ObservationSystem& obs, const Eigen::MatrixXd& Lambda, int first, int count) {
  ObservationSystem sub;
  sub.C = obs.C.middleCols(first, count);
  sub.offset = obs.offset;
  sub.target = obs.target;
  sub.weight = obs.weight;
  sub.blocks = obs.blocks;
  return solve_least_squares(sub, Lambda.block(first, first, count, count));
}

}  // namespace

const char* to_string(ReconMode mode) { return mode == ReconMode::M ? "M" : "J"; }

ReconMode parse_mode(const std::string& s) {
  if (s == "M" || s == "m") return ReconMode::M;
  if (s == "J" || s == "j") return ReconMode::J;
  throw config_error("unknown mode '" + s + "' (expected M or J)");
}

void SolverConfig::validate() const {
  for (double w : {K_probe, K_polarimetry, K_interferometry, K_mse, K_Ip, eps_a, eps_b, eps_ne})
    if (!(w >= 0.0) || !std::isfinite(w)) throw config_error("weights and regularization must be finite and >= 0");
  if (max_iterations < 1) throw config_error("max_iterations must be >= 1");
  if (rt_iterations < 1) throw config_error("rt_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw config_error("tolerance must be > 0");
  if (degree < 2 || degree > 7) throw config_error("spline degree must lie in [2, 7]");
  for (int c : {count_a, count_b, count_ne})
    if (c <= degree) throw config_error("basis count must exceed the spline degree");
}

InverseContext make_context(const Mesh& mesh, const SolverConfig& cfg) {
  cfg.validate();
  return {&mesh, assemble_stiffness(mesh), cfg.basis()};
}

Eigen::VectorXd solve_least_squares(const ObservationSystem& obs, const Eigen::MatrixXd& Lambda) {
  const Eigen::Index n = obs.C.cols();
  if (Lambda.rows() != n || Lambda.cols() != n) throw numeric_error("regularization size does not match the unknowns");
  const Eigen::MatrixXd WC = obs.weight.asDiagonal() * obs.C;
  Eigen::MatrixXd N = obs.C.transpose() * WC + Lambda;
  const Eigen::VectorXd rhs = WC.transpose() * (obs.target - obs.offset);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(N(i, i) > 0.0)) throw numeric_error("ill-posed problem: unknown " + std::to_string(i) + " is unobserved and unregularized");
    d[i] = 1.0 / std::sqrt(N(i, i));
  }
  N = d.asDiagonal() * N * d.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(N);
  const Eigen::VectorXd piv = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || piv.minCoeff() <= 1e-14 * piv.maxCoeff())
    throw numeric_error("ill-posed problem: singular normal matrix, increase the regularization");
  return d.asDiagonal() * ldlt.solve(d.asDiagonal() * rhs);
}

CostScales cost_scales(const Mesh& mesh, const MeasurementSet& meas) {
  CostScales s;
  s.block[static_cast<int>(Block::Probe)] = scale_or_one(rms(probe_targets(meas)));
  s.block[static_cast<int>(Block::Polarimetry)] = scale_or_one(rms(alpha_targets(meas)));
  s.block[static_cast<int>(Block::Interferometry)] = scale_or_one(rms(beta_targets(meas)));
  s.block[static_cast<int>(Block::Mse)] =
      std::max(kMseScaleFloor, rms(gamma_targets(meas).array().tan().matrix()));
  s.block[static_cast<int>(Block::Current)] = scale_or_one(std::abs(meas.globals.Ip));
  s.j_ref = scale_or_one(std::abs(meas.globals.Ip) / mesh.total_area());
  s.n_ref = scale_or_one(rms(beta_targets(meas)) / std::sqrt(mesh.total_area()));
  return s;
}

Eigen::MatrixXd scaled_regularization(const ProfileBasis& basis, const SolverConfig& cfg, const CostScales& s) {
  const double j2 = s.j_ref * s.j_ref, n2 = s.n_ref * s.n_ref;
  return regularization_matrix(basis, cfg.eps_a / j2, cfg.eps_b / j2, cfg.eps_ne / n2);
}

Eigen::VectorXd picard_flux(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& D,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& h) {
  const Eigen::VectorXd load = D * u;
  return solve_with_dirichlet(mesh, op, restrict_to_interior(mesh, load), h);
}

FluxState picard_update(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& D,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& h) {
  return analyze_flux(mesh, picard_flux(mesh, op, D, u, h));
}

IterationRecord evaluate_cost(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                              const DiagnosticGeometry& geom, const MeasurementSet& meas, const SolverConfig& cfg,
                              const CostScales& scales) {
  const ModelOutputs out = evaluate_model(mesh, flux, profiles, geom, meas);
  IterationRecord rec;
  rec.J0 = (out.g - probe_targets(meas)).squaredNorm();
  rec.J1 = (out.alpha - alpha_targets(meas)).squaredNorm();
  rec.J2 = (out.beta - beta_targets(meas)).squaredNorm();
  rec.J3 = (out.mse - gamma_targets(meas)).squaredNorm();
  rec.J_Ip = (out.Ip - meas.globals.Ip) * (out.Ip - meas.globals.Ip);
  const double j2 = scales.j_ref * scales.j_ref, n2 = scales.n_ref * scales.n_ref;
  rec.J_eps = regularization_energy(profiles.basis, profiles.u, cfg.eps_a / j2, cfg.eps_b / j2, cfg.eps_ne / n2);
  rec.total = block_weight(cfg.K_probe, scales, Block::Probe) * rec.J0 +
              block_weight(cfg.K_Ip, scales, Block::Current) * rec.J_Ip + rec.J_eps;
  if (cfg.polarimetry_active()) rec.total += block_weight(cfg.K_polarimetry, scales, Block::Polarimetry) * rec.J1;
  if (cfg.interferometry_active())
    rec.total += block_weight(cfg.K_interferometry, scales, Block::Interferometry) * rec.J2;
  if (cfg.mse_active()) rec.total += block_weight(cfg.K_mse, scales, Block::Mse) * rec.J3;
  rec.u_norm = profiles.u.norm();
  rec.psi_axis = flux.psi_axis();
  rec.psi_b = flux.psi_b();
  return rec;
}

ReconstructionResult reconstruct(const InverseContext& ctx, const MeasurementSet& input, const SolverConfig& cfg,
                                 const std::optional<WarmStart>& warm, std::optional<int> fixed_iterations) {
  MeasurementSet meas = input;
  const bool flipped = orient_flux_sign(meas);
  const auto t0 = Clock::now();
  cfg.validate();
  const Mesh& mesh = *ctx.mesh;
  const ProfileBasis& basis = ctx.basis;
  if (meas.h.size() != mesh.num_boundary())
    throw config_error("measurement boundary has " + std::to_string(meas.h.size()) + " values, mesh has " +
                       std::to_string(mesh.num_boundary()) + " boundary nodes");
  if (basis.total() != cfg.basis().total()) throw config_error("context basis does not match the configuration");

  const double R0 = meas.globals.R0;
  const DiagnosticGeometry geom = compile_geometry(mesh, meas);
  const CostScales scales = cost_scales(mesh, meas);
  const Eigen::MatrixXd Lambda = scaled_regularization(basis, cfg, scales);
  const Eigen::VectorXd psi_h = lift_boundary(mesh, ctx.op, meas.h);

  const bool pol = cfg.polarimetry_active() && !meas.chords.empty();
  const bool itf = cfg.interferometry_active() && !meas.chords.empty();
  const bool mse = cfg.mse_active() && !meas.mse.empty();

  ReconstructionResult res;
  res.trace.scales = scales;
  ProfileSet ps{basis, Eigen::VectorXd::Zero(basis.total()), R0, meas.globals.f0, 1.0, 0.0};
  FluxState flux;
  if (warm) {
    if (warm->profiles.u.size() != basis.total()) throw config_error("warm start basis does not match");
    flux = warm->flux;
    ps.u = warm->profiles.u;
  } else {
    flux = seed_flux(mesh, ctx.op, meas.h, meas.globals.Ip);
    const Eigen::MatrixXd D = assemble_current_matrix(mesh, flux, basis, R0);
    ps.u.segment(basis.offset(ProfileBlock::A), basis.count(ProfileBlock::A)) =
        basis.affine_coefficients(ProfileBlock::A, 1.0, -1.0);
    const double ip_shape = D.colwise().sum().dot(ps.u);
    if (!(ip_shape > 0.0)) throw topology_error("cold start produced an empty plasma region");
    ps.u *= meas.globals.Ip / ip_shape;
    flux = picard_update(mesh, ctx.op, D, ps.u, meas.h);
  }

  const int oab = basis.offset(ProfileBlock::A);
  const int nab = basis.count(ProfileBlock::A) + basis.count(ProfileBlock::B);
  const int one = basis.offset(ProfileBlock::Ne), nne = basis.count(ProfileBlock::Ne);
  const int limit = fixed_iterations ? *fixed_iterations : cfg.max_iterations;
  int growing = 0;
  double last_change = std::numeric_limits<double>::infinity();

  for (int it = 0; it < limit; ++it) {
    const auto ti = Clock::now();
    const Eigen::MatrixXd D = assemble_current_matrix(mesh, flux, basis, R0);
    const ProfileSet ps_n = attach_flux(ps, flux);

    ObservationSystem ab;
    ab.append(probe_rows(mesh, ctx.op, D, psi_h, geom, meas), probe_targets(meas),
              block_weight(cfg.K_probe, scales, Block::Probe), Block::Probe);
    if (pol)
      ab.append(polarimetry_rows(mesh, ctx.op, flux, ps_n, D, psi_h, geom, PolarimetryLag::Density),
                alpha_targets(meas), block_weight(cfg.K_polarimetry, scales, Block::Polarimetry), Block::Polarimetry);
    if (mse)
      ab.append(mse_rows(mesh, ctx.op, flux, ps_n, D, psi_h, geom, meas),
                gamma_targets(meas).array().tan().matrix(), block_weight(cfg.K_mse, scales, Block::Mse), Block::Mse);
    ab.append(current_row(D), Eigen::VectorXd::Constant(1, meas.globals.Ip),
              block_weight(cfg.K_Ip, scales, Block::Current), Block::Current);
    ps.u.segment(oab, nab) = solve_columns(ab, Lambda, oab, nab);

    if (pol || itf) {
      ObservationSystem ne;
      if (itf)
        ne.append(interferometry_rows(mesh, flux, geom, basis), beta_targets(meas),
                  block_weight(cfg.K_interferometry, scales, Block::Interferometry), Block::Interferometry);
      if (pol)
        ne.append(polarimetry_rows(mesh, ctx.op, flux, ps_n, D, psi_h, geom, PolarimetryLag::Field),
                  alpha_targets(meas), block_weight(cfg.K_polarimetry, scales, Block::Polarimetry), Block::Polarimetry);
      ps.u.segment(one, nne) = solve_columns(ne, Lambda, one, nne);
    }

    FluxState next = picard_update(mesh, ctx.op, D, ps.u, meas.h);
    const double change = relative_change(next, flux.psi);
    flux = std::move(next);

    IterationRecord rec = evaluate_cost(mesh, flux, attach_flux(ps, flux), geom, meas, cfg, scales);
    rec.change = change;
    rec.seconds = seconds_since(ti);
    res.trace.records.push_back(rec);
    if (cfg.record_states) {
      res.trace.psi.push_back(flux.psi);
      res.trace.u.push_back(ps.u);
    }

    if (!fixed_iterations && change < cfg.tolerance) {
      res.converged = true;
      break;
    }
    growing = change > last_change && change > 10.0 * cfg.tolerance ? growing + 1 : 0;
    last_change = change;
    if (growing >= 3) throw numeric_error("reconstruction diverging: flux change grew three iterations in a row");
  }
  if (fixed_iterations) res.converged = res.trace.records.back().change < cfg.tolerance;

  res.profiles = attach_flux(ps, flux);
  res.warnings = flux.warnings;
  if (flipped) res.warnings.push_back("flux sign convention flipped on ingest");
  if (flux.boundary.tie_break) res.warnings.push_back("boundary flux tie between saddles");
  if (!fixed_iterations && !res.converged)
    res.warnings.push_back("not converged after " + std::to_string(cfg.max_iterations) + " iterations");
  res.flux = std::move(flux);
  res.seconds = seconds_since(t0);
  return res;
}

ReconstructionResult reconstruct(const Mesh& mesh, const MeasurementSet& meas, const SolverConfig& cfg,
                                 const std::optional<WarmStart>& warm) {
  return reconstruct(make_context(mesh, cfg), meas, cfg, warm);
}

std::vector<ReconstructionResult> reconstruct_sequence(const Mesh& mesh, const std::vector<MeasurementSet>& frames,
                                                       const SolverConfig& cfg) {
  const InverseContext ctx = make_context(mesh, cfg);
  std::vector<ReconstructionResult> out;
  out.reserve(frames.size());
  std::optional<WarmStart> warm;
  for (const auto& frame : frames) {
    ReconstructionResult res;
    try {
      res = warm ? reconstruct(ctx, frame, cfg, warm, cfg.rt_iterations) : reconstruct(ctx, frame, cfg);
    } catch (const Error& e) {
      if (!warm) throw;
      res = reconstruct(ctx, frame, cfg);
      res.error = e.what();
    }
    warm = WarmStart{res.flux, res.profiles};
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace gsrecon
