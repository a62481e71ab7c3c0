#include "gsrecon/diagnostics.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace gsrecon {

namespace {

// Gauss-Legendre on [0, 1].
constexpr std::array<double, 3> kGaussNode = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr std::array<double, 3> kGaussWeight = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double interp_bary(const Mesh& mesh, const Eigen::VectorXd& f, int t, const Eigen::Vector3d& b) {
  const auto& tri = mesh.triangle(t);
  return b[0] * f[tri[0]] + b[1] * f[tri[1]] + b[2] * f[tri[2]];
}

// Nodal functional of grad(psi) . d / r in triangle t.
void add_gradient_functional(const Mesh& mesh, int t, const Point& d, double scale, Eigen::Ref<Eigen::VectorXd> col) {
  const auto& g = mesh.bary_gradients(t);
  const auto& tri = mesh.triangle(t);
  for (int k = 0; k < 3; ++k) col[tri[k]] += scale * g.row(k).dot(d);
}

// Toroidal field at a point: f(psibar)/r inside the plasma, f0/r outside.
double toroidal_field(const FluxState& flux, const ProfileSet& ps, int t, const Point& p, double psibar) {
  const double f = in_plasma(flux, t, p, psibar) ? ps.f(std::clamp(psibar, 0.0, 1.0)) : ps.f0;
  return f / p.x();
}

}  // namespace

const char* to_string(Block b) {
  switch (b) {
    case Block::Probe: return "probe";
    case Block::Polarimetry: return "polarimetry";
    case Block::Interferometry: return "interferometry";
    case Block::Mse: return "mse";
    case Block::Current: return "current";
  }
  return "?";
}

ProfileSet attach_flux(ProfileSet ps, const FluxState& flux) {
  ps.psi_axis = flux.psi_axis();
  ps.psi_b = flux.psi_b();
  return ps;
}

DiagnosticGeometry compile_geometry(const Mesh& mesh, const MeasurementSet& meas) {
  DiagnosticGeometry geom;
  const double h = mesh.mean_edge();

  for (std::size_t i = 0; i < meas.probes.size(); ++i) {
    const auto& pr = meas.probes[i];
    if (pr.normal.norm() == 0.0) throw config_error("probe " + std::to_string(i) + " has a zero normal");
    const Point n = pr.normal.normalized();
    auto loc = mesh.locate(pr.position - 1e-3 * h * n);
    if (!loc) loc = mesh.locate(pr.position, 1e-6);
    if (!loc) throw geometry_error("probe " + std::to_string(i) + " is not adjacent to any triangle");
    geom.probes.push_back(*loc);
  }

  for (std::size_t c = 0; c < meas.chords.size(); ++c) {
    const auto& pts = meas.chords[c].points;
    if (pts.size() < 2) throw config_error("chord " + std::to_string(c) + " needs at least two points");
    std::vector<ChordSample> samples;
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const Point a = pts[s], b = pts[s + 1];
      const double len = (b - a).norm();
      if (len == 0.0) continue;
      const Point t = (b - a) / len;
      const Point n(t.y(), -t.x());
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / (0.5 * h))));
      const double step = len / pieces;
      for (int k = 0; k < pieces; ++k) {
        for (int q = 0; q < 3; ++q) {
          const Point p = a + (k + kGaussNode[q]) * step * t;
          const auto loc = mesh.locate(p);
          if (!loc) continue;
          samples.push_back({loc->triangle, loc->barycentric, p, kGaussWeight[q] * step, n});
        }
      }
    }
    if (samples.empty()) throw geometry_error("chord " + std::to_string(c) + " lies entirely outside the mesh");
    geom.chords.push_back(std::move(samples));
  }

  for (std::size_t i = 0; i < meas.mse.size(); ++i) {
    if (std::abs(meas.mse[i].gamma) >= 0.5 * M_PI)
      throw config_error("mse point " + std::to_string(i) + " has |gamma| >= pi/2");
    const auto loc = mesh.locate(meas.mse[i].position);
    if (!loc) throw geometry_error("mse point " + std::to_string(i) + " lies outside the mesh");
    geom.mse.push_back(*loc);
  }
  return geom;
}

Eigen::VectorXd lift_boundary(const Mesh& mesh, const StiffnessOperator& op, const Eigen::VectorXd& h) {
  return solve_with_dirichlet(mesh, op, Eigen::VectorXd::Zero(mesh.num_interior()), h);
}

AffineRows compose_with_flux(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& L,
                             const Eigen::MatrixXd& D, const Eigen::VectorXd& psi_h) {
  AffineRows out;
  const Eigen::MatrixXd adj = solve_interior(op, restrict_to_interior(mesh, L));
  out.rows = adj.transpose() * restrict_to_interior(mesh, D);
  out.offset = L.transpose() * psi_h;
  return out;
}

Eigen::MatrixXd probe_functionals(const Mesh& mesh, const DiagnosticGeometry& geom, const MeasurementSet& meas) {
  const int m = static_cast<int>(meas.probes.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(mesh.num_nodes(), m);
  for (int i = 0; i < m; ++i) {
    const auto& pr = meas.probes[i];
    add_gradient_functional(mesh, geom.probes[i].triangle, pr.normal.normalized(), 1.0 / pr.position.x(), L.col(i));
  }
  return L;
}

AffineRows probe_rows(const Mesh& mesh, const StiffnessOperator& op, const Eigen::MatrixXd& D,
                      const Eigen::VectorXd& psi_h, const DiagnosticGeometry& geom, const MeasurementSet& meas) {
  return compose_with_flux(mesh, op, probe_functionals(mesh, geom, meas), D, psi_h);
}

AffineRows interferometry_rows(const Mesh& mesh, const FluxState& flux_n, const DiagnosticGeometry& geom,
                               const ProfileBasis& basis) {
  const int m = static_cast<int>(geom.chords.size());
  AffineRows out{Eigen::MatrixXd::Zero(m, basis.total()), Eigen::VectorXd::Zero(m)};
  const auto& bn = basis.block(ProfileBlock::Ne);
  const int off = basis.offset(ProfileBlock::Ne);
  double v[8];
  for (int c = 0; c < m; ++c) {
    for (const auto& s : geom.chords[c]) {
      const double x = interp_bary(mesh, flux_n.psibar, s.triangle, s.bary);
      if (!in_plasma(flux_n, s.triangle, s.p, x)) continue;
      const int first = off + bn.nonzero_values(std::clamp(x, 0.0, 1.0), v);
      for (int j = 0; j <= bn.degree(); ++j) out.rows(c, first + j) += s.weight * v[j];
    }
  }
  return out;
}

AffineRows polarimetry_rows(const Mesh& mesh, const StiffnessOperator& op, const FluxState& flux_n,
                            const ProfileSet& profiles_n, const Eigen::MatrixXd& D, const Eigen::VectorXd& psi_h,
                            const DiagnosticGeometry& geom, PolarimetryLag lag) {
  const int m = static_cast<int>(geom.chords.size());
  const ProfileBasis& basis = profiles_n.basis;
  if (lag == PolarimetryLag::Density) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(mesh.num_nodes(), m);
    for (int c = 0; c < m; ++c) {
      for (const auto& s : geom.chords[c]) {
        const double x = interp_bary(mesh, flux_n.psibar, s.triangle, s.bary);
        if (!in_plasma(flux_n, s.triangle, s.p, x)) continue;
        const double ne = profiles_n.ne(std::clamp(x, 0.0, 1.0));
        if (ne == 0.0) continue;
        add_gradient_functional(mesh, s.triangle, s.normal, s.weight * ne / s.p.x(), L.col(c));
      }
    }
    return compose_with_flux(mesh, op, L, D, psi_h);
  }
  AffineRows out{Eigen::MatrixXd::Zero(m, basis.total()), Eigen::VectorXd::Zero(m)};
  const auto& bn = basis.block(ProfileBlock::Ne);
  const int off = basis.offset(ProfileBlock::Ne);
  double v[8];
  for (int c = 0; c < m; ++c) {
    for (const auto& s : geom.chords[c]) {
      const double x = interp_bary(mesh, flux_n.psibar, s.triangle, s.bary);
      if (!in_plasma(flux_n, s.triangle, s.p, x)) continue;
      const double bpar = triangle_gradient(mesh, flux_n.psi, s.triangle).dot(s.normal) / s.p.x();
      const int first = off + bn.nonzero_values(std::clamp(x, 0.0, 1.0), v);
      for (int j = 0; j <= bn.degree(); ++j) out.rows(c, first + j) += s.weight * bpar * v[j];
    }
  }
  return out;
}

AffineRows mse_rows(const Mesh& mesh, const StiffnessOperator& op, const FluxState& flux_n, const ProfileSet& profiles_n,
                    const Eigen::MatrixXd& D, const Eigen::VectorXd& psi_h, const DiagnosticGeometry& geom,
                    const MeasurementSet& meas) {
  const int m = static_cast<int>(meas.mse.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(mesh.num_nodes(), m);
  Eigen::VectorXd extra(m);
  for (int i = 0; i < m; ++i) {
    const auto& pt = meas.mse[i];
    const auto& a = pt.a;
    const int t = geom.mse[i].triangle;
    const Point& p = pt.position;
    const double r = p.x();
    const Eigen::Vector2d grad = triangle_gradient(mesh, flux_n.psi, t);
    const double br = -grad.y() / r, bz = grad.x() / r;
    const double bphi = toroidal_field(flux_n, profiles_n, t, p, interp_bary(mesh, flux_n.psibar, t, geom.mse[i].barycentric));
    const double den = a[3] * br + a[4] * bz + a[5] * bphi;
    const double scale = std::max({std::abs(a[3] * br), std::abs(a[4] * bz), std::abs(a[5] * bphi), 1e-300});
    if (std::abs(den) <= 1e-12 * scale)
      throw numeric_error("mse point " + std::to_string(i) + ": pitch-angle denominator vanishes");
    const double tg = std::tan(pt.gamma);
    add_gradient_functional(mesh, t, Point(0.0, -1.0), (a[0] - tg * a[3]) / (r * den), L.col(i));
    add_gradient_functional(mesh, t, Point(1.0, 0.0), (a[1] - tg * a[4]) / (r * den), L.col(i));
    extra[i] = (a[2] - tg * a[5]) * bphi / den + tg;
  }
  AffineRows out = compose_with_flux(mesh, op, L, D, psi_h);
  out.offset += extra;
  return out;
}

AffineRows current_row(const Eigen::MatrixXd& D) {
  return {D.colwise().sum(), Eigen::VectorXd::Zero(1)};
}

void ObservationSystem::append(const AffineRows& r, const Eigen::VectorXd& k, double w, Block b) {
  if (r.rows.rows() != k.size() || r.offset.size() != k.size())
    throw numeric_error("observation block sizes disagree");
  if (C.size() == 0) C.resize(0, r.rows.cols());
  const Eigen::Index n0 = C.rows(), m = k.size();
  C.conservativeResize(n0 + m, r.rows.cols());
  C.bottomRows(m) = r.rows;
  offset.conservativeResize(n0 + m);
  offset.tail(m) = r.offset;
  target.conservativeResize(n0 + m);
  target.tail(m) = k;
  weight.conservativeResize(n0 + m);
  weight.tail(m).setConstant(w);
  blocks.insert(blocks.end(), m, b);
}

double plasma_current(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles) {
  double ip = 0.0;
  for (const auto& q : plasma_quadrature(mesh, flux)) {
    const double x = std::clamp(q.psibar, 0.0, 1.0);
    const double r = q.p.x();
    ip += q.weight * ((r / profiles.R0) * profiles.A(x) + (profiles.R0 / r) * profiles.B(x));
  }
  return ip;
}

ModelOutputs evaluate_model(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles_in,
                            const DiagnosticGeometry& geom, const MeasurementSet& meas) {
  const ProfileSet profiles = attach_flux(profiles_in, flux);
  ModelOutputs out;
  out.h.resize(mesh.num_boundary());
  for (int k = 0; k < mesh.num_boundary(); ++k) out.h[k] = flux.psi[mesh.boundary_nodes()[k]];

  out.g = probe_functionals(mesh, geom, meas).transpose() * flux.psi;

  const int nc = static_cast<int>(geom.chords.size());
  out.alpha = Eigen::VectorXd::Zero(nc);
  out.beta = Eigen::VectorXd::Zero(nc);
  for (int c = 0; c < nc; ++c) {
    for (const auto& s : geom.chords[c]) {
      const double x = interp_bary(mesh, flux.psibar, s.triangle, s.bary);
      if (!in_plasma(flux, s.triangle, s.p, x)) continue;
      const double ne = profiles.ne(std::clamp(x, 0.0, 1.0));
      out.beta[c] += s.weight * ne;
      out.alpha[c] += s.weight * ne * triangle_gradient(mesh, flux.psi, s.triangle).dot(s.normal) / s.p.x();
    }
  }

  const int nm = static_cast<int>(meas.mse.size());
  out.mse.resize(nm);
  for (int i = 0; i < nm; ++i) {
    const auto& a = meas.mse[i].a;
    const Point& p = meas.mse[i].position;
    const int t = geom.mse[i].triangle;
    const Eigen::Vector2d grad = triangle_gradient(mesh, flux.psi, t);
    const double br = -grad.y() / p.x(), bz = grad.x() / p.x();
    const double bphi = toroidal_field(flux, profiles, t, p, interp_bary(mesh, flux.psibar, t, geom.mse[i].barycentric));
    const double num = a[0] * br + a[1] * bz + a[2] * bphi;
    const double den = a[3] * br + a[4] * bz + a[5] * bphi;
    if (den == 0.0) throw numeric_error("mse point " + std::to_string(i) + ": pitch-angle denominator vanishes");
    out.mse[i] = std::atan(num / den);
  }

  out.Ip = plasma_current(mesh, flux, profiles);
  return out;
}

MeasurementSet perturb(MeasurementSet meas, const NoiseSpec& noise) {
  if (!(noise.level >= 0.0)) throw config_error("noise level must be >= 0");
  if (noise.level == 0.0) return meas;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto apply = [&](double& v, bool on) {
    if (on) v *= 1.0 + noise.level * gauss(rng);
  };
  for (Eigen::Index k = 0; k < meas.h.size(); ++k) apply(meas.h[k], noise.boundary);
  for (auto& p : meas.probes) apply(p.g, noise.probes);
  for (auto& c : meas.chords) {
    apply(c.alpha, noise.chords);
    apply(c.beta, noise.chords);
  }
  for (auto& p : meas.mse) apply(p.gamma, noise.mse);
  apply(meas.globals.Ip, noise.current);
  return meas;
}

std::optional<double> probe_enclosed_current(const MeasurementSet& meas) {
  const std::size_t n = meas.probes.size();
  if (n < 3) return std::nullopt;
  Point c = Point::Zero();
  for (const auto& p : meas.probes) c += p.position;
  c /= static_cast<double>(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto angle = [&](std::size_t i) {
    const Point d = meas.probes[i].position - c;
    return std::atan2(d.y(), d.x());
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return angle(a) < angle(b); });
  // -(1/mu0) loop integral of (1/r) dpsi/dn, with each probe covering half the gap to either neighbour.
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& prev = meas.probes[order[(k + n - 1) % n]].position;
    const auto& next = meas.probes[order[(k + 1) % n]].position;
    const auto& p = meas.probes[order[k]].position;
    sum += meas.probes[order[k]].g * 0.5 * ((p - prev).norm() + (next - p).norm());
  }
  return -sum / kMu0;
}

bool orient_flux_sign(MeasurementSet& meas) {
  const auto enclosed = probe_enclosed_current(meas);
  if (!enclosed || meas.globals.Ip == 0.0 || *enclosed * meas.globals.Ip >= 0.0) return false;
  meas.h = -meas.h;
  for (auto& p : meas.probes) p.g = -p.g;
  for (auto& c : meas.chords) c.alpha = -c.alpha;
  for (auto& m : meas.mse)
    for (int k : {0, 1, 3, 4}) m.a[k] = -m.a[k];
  return true;
}

MeasurementSet synthesize(const Mesh& mesh, const FluxState& flux, const ProfileSet& profiles,
                          const MeasurementSet& geometry, const NoiseSpec& noise) {
  MeasurementSet meas = geometry;
  meas.h = Eigen::VectorXd::Zero(mesh.num_boundary());
  const DiagnosticGeometry geom = compile_geometry(mesh, meas);
  const ModelOutputs out = evaluate_model(mesh, flux, profiles, geom, meas);

  meas.h = out.h;
  for (std::size_t i = 0; i < meas.probes.size(); ++i) meas.probes[i].g = out.g[i];
  for (std::size_t c = 0; c < meas.chords.size(); ++c) {
    meas.chords[c].alpha = out.alpha[c];
    meas.chords[c].beta = out.beta[c];
  }
  for (std::size_t i = 0; i < meas.mse.size(); ++i) meas.mse[i].gamma = out.mse[i];
  meas.globals.Ip = out.Ip;
  meas.globals.f0 = profiles.f0;
  meas.globals.R0 = profiles.R0;
  return perturb(std::move(meas), noise);
}

}  // namespace gsrecon
