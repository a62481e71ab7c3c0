// Operator property checks shared by the unit tests and the acceptance binary.
#ifndef GSRECON_TESTS_PROPERTIES_HPP
#define GSRECON_TESTS_PROPERTIES_HPP

#include "oracles.hpp"

#include "gsrecon/cases.hpp"

#include <random>
#include <sstream>
#include <string>

namespace props {

using namespace gsrecon;

struct Check {
  std::string name;
  bool ok = true;
  double worst = 0.0;
  double limit = 0.0;

  void observe(double err) {
    worst = std::max(worst, err);
    if (!(err <= limit)) ok = false;
  }
  std::string describe() const {
    std::ostringstream o;
    o << name << ": worst " << worst << " (limit " << limit << ")";
    return o.str();
  }
};

/// State plus everything needed to build observation rows around it.
struct Fixture {
  SyntheticCase sc;
  DiagnosticGeometry geom;
  Eigen::MatrixXd D;
  Eigen::VectorXd psi_h;
  ProfileSet profiles;

  explicit Fixture(SyntheticCase c) : sc(std::move(c)) {
    const Mesh& mesh = *sc.mesh;
    geom = compile_geometry(mesh, sc.measurements);
    profiles = attach_flux(sc.truth, sc.flux);
    D = assemble_current_matrix(mesh, sc.flux, profiles.basis, profiles.R0);
    psi_h = lift_boundary(mesh, sc.op, sc.measurements.h);
  }

  /// Flux for coefficients u: psi = K^-1 (D u) with psi = h on the wall.
  Eigen::VectorXd solve(const Eigen::VectorXd& u) const {
    return solve_with_dirichlet(*sc.mesh, sc.op, restrict_to_interior(*sc.mesh, D * u), sc.measurements.h);
  }

  Eigen::VectorXd random_u(std::mt19937_64& rng) const {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd u = profiles.u;
    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] *= 1.0 + 0.3 * n(rng);
    return u;
  }
};

inline double scaled_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double s = std::max({a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>(), 1e-300});
  return (a - b).lpNorm<Eigen::Infinity>() / s;
}

/// (K^-T l)^T (D u + r) against l(K^-1 (D u + r)) for random nodal functionals
/// l and random interior loads r, then every diagnostic block composed through
/// the adjoint against its direct evaluation on the explicitly solved flux.
inline Check adjoint_identity(const Fixture& fx, std::uint64_t seed = 1) {
  Check c{"adjoint identity", true, 0.0, 1e-9};
  const Mesh& mesh = *fx.sc.mesh;
  const MeasurementSet& meas = fx.sc.measurements;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);

  const Eigen::MatrixXd L = Eigen::MatrixXd::NullaryExpr(mesh.num_nodes(), 6, [&] { return n(rng); });
  const Eigen::MatrixXd L_int = restrict_to_interior(mesh, L);
  const Eigen::MatrixXd adj = solve_interior(fx.sc.op, L_int);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = fx.random_u(rng);
    Eigen::VectorXd load = restrict_to_interior(mesh, fx.D * u);
    load += 1e-3 * load.norm() / std::sqrt(double(load.size())) *
            Eigen::VectorXd::NullaryExpr(load.size(), [&] { return n(rng); });
    const Eigen::VectorXd lhs = adj.transpose() * load;
    const Eigen::VectorXd rhs = L_int.transpose() * solve_interior(fx.sc.op, load);
    c.observe(scaled_error(lhs, rhs));
  }

  const double x_span = fx.sc.flux.psi_b() - fx.sc.flux.psi_axis();
  const AffineRows probe = probe_rows(mesh, fx.sc.op, fx.D, fx.psi_h, fx.geom, meas);
  const AffineRows pol =
      polarimetry_rows(mesh, fx.sc.op, fx.sc.flux, fx.profiles, fx.D, fx.psi_h, fx.geom, PolarimetryLag::Density);
  const AffineRows mse = mse_rows(mesh, fx.sc.op, fx.sc.flux, fx.profiles, fx.D, fx.psi_h, fx.geom, meas);
  const double h = mesh.mean_edge();
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd u = fx.random_u(rng);
    const Eigen::VectorXd psi = fx.solve(u);

    Eigen::VectorXd g(meas.probes.size());
    for (std::size_t i = 0; i < meas.probes.size(); ++i) {
      const auto& p = meas.probes[i];
      const Point nn = p.normal.normalized();
      auto loc = mesh.locate(p.position - 1e-3 * h * nn);
      if (!loc) loc = mesh.locate(p.position, 1e-6);
      g[i] = oracle::p1_gradient(mesh, psi, loc.value().triangle).dot(nn) / p.position.x();
    }
    c.observe(scaled_error(probe.rows * u + probe.offset, g));

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(meas.chords.size());
    for (std::size_t k = 0; k < fx.geom.chords.size(); ++k)
      for (const auto& s : fx.geom.chords[k]) {
        const double x = (oracle::p1_value(mesh, fx.sc.flux.psi, s.triangle, s.p) - fx.sc.flux.psi_axis()) / x_span;
        if (!in_plasma(fx.sc.flux, s.triangle, s.p, x)) continue;
        alpha[k] += s.weight * fx.profiles.ne(std::clamp(x, 0.0, 1.0)) *
                    oracle::p1_gradient(mesh, psi, s.triangle).dot(s.normal) / s.p.x();
      }
    c.observe(scaled_error(pol.rows * u + pol.offset, alpha));

    Eigen::VectorXd res(meas.mse.size());
    for (std::size_t i = 0; i < meas.mse.size(); ++i) {
      const auto& m = meas.mse[i];
      const auto& a = m.a;
      const int t = fx.geom.mse[i].triangle;
      const double r = m.position.x();
      const Eigen::Vector2d g_n = oracle::p1_gradient(mesh, fx.sc.flux.psi, t);
      const Eigen::Vector2d g_u = oracle::p1_gradient(mesh, psi, t);
      const double x = (oracle::p1_value(mesh, fx.sc.flux.psi, t, m.position) - fx.sc.flux.psi_axis()) / x_span;
      const double bphi =
          (in_plasma(fx.sc.flux, t, m.position, x) ? fx.profiles.f(std::clamp(x, 0.0, 1.0)) : fx.profiles.f0) / r;
      const double den = a[3] * (-g_n.y() / r) + a[4] * (g_n.x() / r) + a[5] * bphi;
      const double tg = std::tan(m.gamma);
      res[i] = ((a[0] - tg * a[3]) * (-g_u.y() / r) + (a[1] - tg * a[4]) * (g_u.x() / r) + (a[2] - tg * a[5]) * bphi) /
                   den +
               tg;
    }
    c.observe(scaled_error(mse.rows * u + mse.offset, res));
  }
  return c;
}

/// rows(a u1 + (1 - a) u2) = a rows(u1) + (1 - a) rows(u2) for every block.
inline Check affinity(const Fixture& fx, std::uint64_t seed = 2) {
  Check c{"affinity of observation rows", true, 0.0, 1e-12};
  const Mesh& mesh = *fx.sc.mesh;
  const auto& op = fx.sc.op;
  const MeasurementSet& meas = fx.sc.measurements;
  const std::vector<AffineRows> blocks{
      probe_rows(mesh, op, fx.D, fx.psi_h, fx.geom, meas),
      interferometry_rows(mesh, fx.sc.flux, fx.geom, fx.profiles.basis),
      polarimetry_rows(mesh, op, fx.sc.flux, fx.profiles, fx.D, fx.psi_h, fx.geom, PolarimetryLag::Density),
      polarimetry_rows(mesh, op, fx.sc.flux, fx.profiles, fx.D, fx.psi_h, fx.geom, PolarimetryLag::Field),
      mse_rows(mesh, op, fx.sc.flux, fx.profiles, fx.D, fx.psi_h, fx.geom, meas),
      current_row(fx.D)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-0.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd u1 = fx.random_u(rng), u2 = fx.random_u(rng);
    const double a = unit(rng);
    for (const auto& b : blocks) {
      const Eigen::VectorXd m1 = b.rows * u1 + b.offset, m2 = b.rows * u2 + b.offset;
      const Eigen::VectorXd mix = b.rows * (a * u1 + (1.0 - a) * u2) + b.offset;
      c.observe(scaled_error(mix, a * m1 + (1.0 - a) * m2));
    }
  }
  return c;
}

/// Basis values sum to one at 1000 uniform samples and at both ends.
inline Check partition_of_unity(std::uint64_t seed = 3) {
  Check c{"partition of unity", true, 0.0, 1e-12};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto [p, m] : {std::pair{3, 8}, {1, 2}, {2, 5}, {3, 4}, {3, 12}, {5, 9}}) {
    const BSplineBasisd basis(p, m);
    c.observe(std::abs(basis.evaluate(0.0).sum() - 1.0));
    c.observe(std::abs(basis.evaluate(1.0).sum() - 1.0));
    for (int k = 0; k < 1000; ++k) c.observe(std::abs(basis.evaluate(unit(rng)).sum() - 1.0));
  }
  return c;
}

/// psi -> a psi + b (a > 0) leaves psibar, the plasma mask and the boundary
/// contour unchanged.
inline Check psibar_affine_invariance(const Fixture& fx) {
  Check c{"psibar affine invariance", true, 0.0, 1e-9};
  const Mesh& mesh = *fx.sc.mesh;
  const FluxState& ref = fx.sc.flux;
  for (auto [a, b] : {std::pair{2.5, -0.3}, {1e-3, 7.0}, {40.0, 1e3}}) {
    const Eigen::VectorXd psi = (a * ref.psi.array() + b).matrix();
    const Eigen::VectorXd direct = normalize_flux(psi, a * ref.psi_axis() + b, a * ref.psi_b() + b);
    c.observe((direct - ref.psibar).lpNorm<Eigen::Infinity>());
    const FluxState moved = analyze_flux(mesh, psi);
    c.observe((moved.psibar - ref.psibar).lpNorm<Eigen::Infinity>());
    double mask = 0.0;
    for (std::size_t t = 0; t < ref.mask.size(); ++t) mask = std::max(mask, std::abs(moved.mask[t] - ref.mask[t]));
    c.observe(mask);
    c.observe(hausdorff_distance(moved.boundary_contour.points, ref.boundary_contour.points));
  }
  return c;
}

/// Zero load with constant wall flux gives that constant everywhere and no
/// probe signal.
inline Check vacuum_constant_flux(const Fixture& fx) {
  Check c{"vacuum constant flux", true, 0.0, 1e-10};
  const Mesh& mesh = *fx.sc.mesh;
  const DiagnosticGeometry& geom = fx.geom;
  const Eigen::MatrixXd L = probe_functionals(mesh, geom, fx.sc.measurements);
  for (double value : {1.0, -3.5, 0.42, 1e3}) {
    const Eigen::VectorXd h = Eigen::VectorXd::Constant(mesh.num_boundary(), value);
    const Eigen::VectorXd psi = solve_with_dirichlet(mesh, fx.sc.op, Eigen::VectorXd::Zero(mesh.num_interior()), h);
    c.observe((psi.array() - value).abs().maxCoeff() / std::abs(value));
    // Gradient functionals scale like 1/h, so compare against |value|/h.
    c.observe((L.transpose() * psi).lpNorm<Eigen::Infinity>() * mesh.mean_edge() / std::abs(value));
  }
  return c;
}

inline std::vector<Check> run_all(const Fixture& fx) {
  return {adjoint_identity(fx), affinity(fx), partition_of_unity(), psibar_affine_invariance(fx),
          vacuum_constant_flux(fx)};
}

}  // namespace props

#endif  // GSRECON_TESTS_PROPERTIES_HPP
