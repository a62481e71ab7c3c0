// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the library's spline, gradient, chord or cost code.
#ifndef GSRECON_TESTS_ORACLES_HPP
#define GSRECON_TESTS_ORACLES_HPP

#include "gsrecon/inverse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using gsrecon::Mesh;
using gsrecon::Point;

/// Clamped knot vector with uniform interior knots on [0, 1].
inline std::vector<double> clamped_knots(int degree, int count) {
  std::vector<double> t(degree + 1, 0.0);
  const int interior = count - degree - 1;
  for (int i = 1; i <= interior; ++i) t.push_back(static_cast<double>(i) / (interior + 1));
  t.insert(t.end(), degree + 1, 1.0);
  return t;
}

/// Cox-de Boor recursion; the last nonzero span is closed at x = 1.
inline double cox_de_boor(const std::vector<double>& t, int i, int p, double x) {
  if (p == 0) {
    const double last = t.back();
    if (x == last) {
      // Only the final nonempty span is active at the right end.
      int k = static_cast<int>(t.size()) - 2;
      while (k > 0 && t[k] == t[k + 1]) --k;
      return i == k ? 1.0 : 0.0;
    }
    return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  }
  double v = 0.0;
  if (t[i + p] > t[i]) v += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, x);
  if (t[i + p + 1] > t[i + 1]) v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, i + 1, p - 1, x);
  return v;
}

/// d^order/dx^order of N_{i,p} by the derivative recursion.
inline double cox_de_boor_derivative(const std::vector<double>& t, int i, int p, double x, int order) {
  if (order == 0) return cox_de_boor(t, i, p, x);
  double v = 0.0;
  if (t[i + p] > t[i]) v += p / (t[i + p] - t[i]) * cox_de_boor_derivative(t, i, p - 1, x, order - 1);
  if (t[i + p + 1] > t[i + 1])
    v -= p / (t[i + p + 1] - t[i + 1]) * cox_de_boor_derivative(t, i + 1, p - 1, x, order - 1);
  return v;
}

/// Six-point Gauss-Legendre nodes and weights on [0, 1].
inline void gauss6(std::array<double, 6>& x, std::array<double, 6>& w) {
  const double n[3] = {0.2386191860831969, 0.6612093864662645, 0.9324695142031521};
  const double c[3] = {0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
  for (int k = 0; k < 3; ++k) {
    x[2 * k] = 0.5 * (1.0 - n[k]);
    x[2 * k + 1] = 0.5 * (1.0 + n[k]);
    w[2 * k] = w[2 * k + 1] = 0.5 * c[k];
  }
}

/// Sum of coefficients times basis functions of one block.
inline double spline(int degree, const Eigen::Ref<const Eigen::VectorXd>& c, double x) {
  const auto t = clamped_knots(degree, static_cast<int>(c.size()));
  double s = 0.0;
  for (int i = 0; i < c.size(); ++i) s += c[i] * cox_de_boor(t, i, degree, x);
  return s;
}

/// int_x^1 of the spline, span-wise six-point Gauss.
inline double spline_tail(int degree, const Eigen::Ref<const Eigen::VectorXd>& c, double x) {
  const auto t = clamped_knots(degree, static_cast<int>(c.size()));
  std::array<double, 6> gx, gw;
  gauss6(gx, gw);
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double a = std::max(t[k], x), b = t[k + 1];
    if (b <= a) continue;
    for (int q = 0; q < 6; ++q) s += (b - a) * gw[q] * spline(degree, c, a + (b - a) * gx[q]);
  }
  return s;
}

/// S_ij = int_0^1 N_i'' N_j'' dx.
inline Eigen::MatrixXd second_derivative_gram(int degree, int count) {
  const auto t = clamped_knots(degree, count);
  std::array<double, 6> gx, gw;
  gauss6(gx, gw);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(count, count);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double a = t[k], b = t[k + 1];
    if (b <= a) continue;
    for (int q = 0; q < 6; ++q) {
      const double x = a + (b - a) * gx[q];
      Eigen::VectorXd d(count);
      for (int i = 0; i < count; ++i) d[i] = cox_de_boor_derivative(t, i, degree, x, 2);
      S += (b - a) * gw[q] * d * d.transpose();
    }
  }
  return S;
}

/// int_0^1 s''(x)^2 dx for s = sum c_i N_i.
inline double curvature_energy(int degree, const Eigen::Ref<const Eigen::VectorXd>& c) {
  const auto t = clamped_knots(degree, static_cast<int>(c.size()));
  std::array<double, 6> gx, gw;
  gauss6(gx, gw);
  double e = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double a = t[k], b = t[k + 1];
    if (b <= a) continue;
    for (int q = 0; q < 6; ++q) {
      const double x = a + (b - a) * gx[q];
      double d2 = 0.0;
      for (int i = 0; i < c.size(); ++i) d2 += c[i] * cox_de_boor_derivative(t, i, degree, x, 2);
      e += (b - a) * gw[q] * d2 * d2;
    }
  }
  return e;
}

/// Gradient of the linear interpolant on triangle t from its three vertices.
inline Eigen::Vector2d p1_gradient(const Mesh& mesh, const Eigen::VectorXd& f, int t) {
  const auto& tri = mesh.triangle(t);
  const Point a = mesh.node(tri[0]), b = mesh.node(tri[1]), c = mesh.node(tri[2]);
  Eigen::Matrix2d M;
  M << (b - a).transpose(), (c - a).transpose();
  const Eigen::Vector2d rhs(f[tri[1]] - f[tri[0]], f[tri[2]] - f[tri[0]]);
  return M.fullPivLu().solve(rhs);
}

/// Linear interpolation inside triangle t from vertex coordinates.
inline double p1_value(const Mesh& mesh, const Eigen::VectorXd& f, int t, const Point& p) {
  const auto& tri = mesh.triangle(t);
  return f[tri[0]] + p1_gradient(mesh, f, t).dot(p - mesh.node(tri[0]));
}

struct Profiles {
  int degree;
  Eigen::VectorXd a, b, ne;
  double R0, f0, psi_axis, psi_b;

  double f(double x) const {
    const double f2 = f0 * f0 - 2.0 * gsrecon::kMu0 * R0 * (psi_b - psi_axis) * spline_tail(degree, b, x);
    return std::copysign(std::sqrt(f2), f0);
  }
};

inline Profiles split_profiles(const gsrecon::SolverConfig& cfg, const Eigen::VectorXd& u, double R0, double f0,
                               const gsrecon::FluxState& flux) {
  return {cfg.degree, u.segment(0, cfg.count_a), u.segment(cfg.count_a, cfg.count_b),
          u.segment(cfg.count_a + cfg.count_b, cfg.count_ne), R0, f0, flux.psi_axis(), flux.psi_b()};
}

struct Cost {
  double J0 = 0, J1 = 0, J2 = 0, J3 = 0, J_Ip = 0, J_eps = 0, total = 0;
};

inline double rms(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / v.size());
}

/// Brute-force cost of a stored state (psi, u): every model value is
/// recomputed from the measurement definitions, with the composite
/// three-point Gauss chord rule (pieces no longer than half the mean edge).
inline Cost recompute_cost(const Mesh& mesh, const gsrecon::MeasurementSet& meas, const gsrecon::SolverConfig& cfg,
                           const Eigen::VectorXd& psi, const Eigen::VectorXd& u) {
  const gsrecon::FluxState flux = gsrecon::analyze_flux(mesh, psi);
  const Profiles pr = split_profiles(cfg, u, meas.globals.R0, meas.globals.f0, flux);
  const double h = mesh.mean_edge();
  Cost c;

  std::vector<double> g_t, a_t, b_t, tan_t;
  for (const auto& p : meas.probes) {
    g_t.push_back(p.g);
    const Point n = p.normal.normalized();
    auto loc = mesh.locate(p.position - 1e-3 * h * n);
    if (!loc) loc = mesh.locate(p.position, 1e-6);
    const double g = p1_gradient(mesh, psi, loc.value().triangle).dot(n) / p.position.x();
    c.J0 += (g - p.g) * (g - p.g);
  }

  const double gn[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (const auto& ch : meas.chords) {
    a_t.push_back(ch.alpha);
    b_t.push_back(ch.beta);
    double alpha = 0.0, beta = 0.0;
    for (std::size_t s = 0; s + 1 < ch.points.size(); ++s) {
      const Point a = ch.points[s], b = ch.points[s + 1];
      const double len = (b - a).norm();
      if (len == 0.0) continue;
      const Point t = (b - a) / len;
      const Point n(t.y(), -t.x());
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / (0.5 * h))));
      const double step = len / pieces;
      for (int k = 0; k < pieces; ++k)
        for (int q = 0; q < 3; ++q) {
          const Point p = a + (k + gn[q]) * step * t;
          const auto loc = mesh.locate(p);
          if (!loc) continue;
          const double x = (p1_value(mesh, psi, loc->triangle, p) - flux.psi_axis()) / (flux.psi_b() - flux.psi_axis());
          if (!gsrecon::in_plasma(flux, loc->triangle, p, x)) continue;
          const double ne = spline(pr.degree, pr.ne, std::clamp(x, 0.0, 1.0));
          beta += gw[q] * step * ne;
          alpha += gw[q] * step * ne * p1_gradient(mesh, psi, loc.value().triangle).dot(n) / p.x();
        }
    }
    c.J1 += (alpha - ch.alpha) * (alpha - ch.alpha);
    c.J2 += (beta - ch.beta) * (beta - ch.beta);
  }

  for (const auto& m : meas.mse) {
    tan_t.push_back(std::tan(m.gamma));
    const auto loc = mesh.locate(m.position);
    const Point& p = m.position;
    const Eigen::Vector2d g = p1_gradient(mesh, psi, loc.value().triangle);
    const double br = -g.y() / p.x(), bz = g.x() / p.x();
    const double x = (p1_value(mesh, psi, loc->triangle, p) - flux.psi_axis()) / (flux.psi_b() - flux.psi_axis());
    const double f = gsrecon::in_plasma(flux, loc->triangle, p, x) ? pr.f(std::clamp(x, 0.0, 1.0)) : pr.f0;
    const double bphi = f / p.x();
    const auto& a = m.a;
    const double gamma = std::atan((a[0] * br + a[1] * bz + a[2] * bphi) / (a[3] * br + a[4] * bz + a[5] * bphi));
    c.J3 += (gamma - m.gamma) * (gamma - m.gamma);
  }

  double ip = 0.0;
  for (const auto& q : gsrecon::plasma_quadrature(mesh, flux)) {
    const double x = std::clamp(q.psibar, 0.0, 1.0), r = q.p.x();
    ip += q.weight * ((r / pr.R0) * spline(pr.degree, pr.a, x) + (pr.R0 / r) * spline(pr.degree, pr.b, x));
  }
  c.J_Ip = (ip - meas.globals.Ip) * (ip - meas.globals.Ip);

  double area = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const Point e1 = mesh.node(tri[1]) - mesh.node(tri[0]), e2 = mesh.node(tri[2]) - mesh.node(tri[0]);
    area += 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
  }
  auto or_one = [](double s) { return s > 0.0 ? s : 1.0; };
  const double j_ref = or_one(std::abs(meas.globals.Ip) / area);
  const double n_ref = or_one(rms(b_t) / std::sqrt(area));
  c.J_eps = cfg.eps_a / (j_ref * j_ref) * curvature_energy(cfg.degree, pr.a) +
            cfg.eps_b / (j_ref * j_ref) * curvature_energy(cfg.degree, pr.b) +
            cfg.eps_ne / (n_ref * n_ref) * curvature_energy(cfg.degree, pr.ne);

  const bool j_mode = cfg.mode == gsrecon::ReconMode::J;
  auto w = [](double K, double s) { return K / (s * s); };
  c.total = w(cfg.K_probe, or_one(rms(g_t))) * c.J0 + w(cfg.K_Ip, or_one(std::abs(meas.globals.Ip))) * c.J_Ip + c.J_eps;
  if (j_mode && cfg.use_polarimetry) c.total += w(cfg.K_polarimetry, or_one(rms(a_t))) * c.J1;
  if (j_mode && cfg.use_interferometry) c.total += w(cfg.K_interferometry, or_one(rms(b_t))) * c.J2;
  if (j_mode && cfg.use_mse) c.total += w(cfg.K_mse, std::max(0.05, rms(tan_t))) * c.J3;
  return c;
}

inline double relative_difference(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace oracle

#endif  // GSRECON_TESTS_ORACLES_HPP
