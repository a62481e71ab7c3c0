#include "gsrecon/fem.hpp"

#include <fstream>
#include <iomanip>

namespace gsrecon {

Eigen::Matrix3d local_stiffness(const Mesh& mesh, int t) {
  const auto& g = mesh.bary_gradients(t);
  const double s = mesh.area(t) / (kMu0 * mesh.centroid(t).x());
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) k(i, j) = k(j, i) = s * g.row(i).dot(g.row(j));
  return k;
}

SparseMatrix assemble_full_stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Matrix3d k = local_stiffness(mesh, t);
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], k(i, j));
  }
  SparseMatrix K(mesh.num_nodes(), mesh.num_nodes());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

StiffnessOperator assemble_stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> ii, ib;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Matrix3d k = local_stiffness(mesh, t);
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const int row = mesh.interior_index(tri[i]);
      if (row < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int ci = mesh.interior_index(tri[j]);
        if (ci >= 0)
          ii.emplace_back(row, ci, k(i, j));
        else
          ib.emplace_back(row, mesh.boundary_index(tri[j]), k(i, j));
      }
    }
  }
  StiffnessOperator op;
  op.interior.resize(mesh.num_interior(), mesh.num_interior());
  op.interior.setFromTriplets(ii.begin(), ii.end());
  op.coupling.resize(mesh.num_interior(), mesh.num_boundary());
  op.coupling.setFromTriplets(ib.begin(), ib.end());
  auto factor = std::make_shared<CholeskyFactor>();
  if (mesh.num_interior() > 0) {
    factor->compute(op.interior);
    if (factor->info() != Eigen::Success) throw numeric_error("stiffness factorization failed");
  }
  op.factor = std::move(factor);
  return op;
}

Eigen::MatrixXd solve_interior(const StiffnessOperator& op, const Eigen::MatrixXd& rhs) {
  if (rhs.rows() == 0) return rhs;
  Eigen::MatrixXd x = op.factor->solve(rhs);
  if (op.factor->info() != Eigen::Success) throw numeric_error("stiffness solve failed");
  return x;
}

Eigen::VectorXd solve_with_dirichlet(const Mesh& mesh, const StiffnessOperator& op, const Eigen::VectorXd& load_interior,
                                     const Eigen::VectorXd& h) {
  if (load_interior.size() != mesh.num_interior() || h.size() != mesh.num_boundary())
    throw numeric_error("solve_with_dirichlet: load/boundary sizes do not match the mesh");
  Eigen::VectorXd psi(mesh.num_nodes());
  const Eigen::VectorXd rhs = load_interior - op.coupling * h;
  const Eigen::VectorXd x = solve_interior(op, rhs);
  for (int k = 0; k < mesh.num_interior(); ++k) psi[mesh.interior_nodes()[k]] = x[k];
  for (int k = 0; k < mesh.num_boundary(); ++k) psi[mesh.boundary_nodes()[k]] = h[k];
  return psi;
}

Eigen::MatrixXd restrict_to_interior(const Mesh& mesh, const Eigen::MatrixXd& full) {
  Eigen::MatrixXd out(mesh.num_interior(), full.cols());
  for (int k = 0; k < mesh.num_interior(); ++k) out.row(k) = full.row(mesh.interior_nodes()[k]);
  return out;
}

Eigen::MatrixXd assemble_current_matrix(const Mesh& mesh, const FluxState& flux, const ProfileBasis& basis, double R0) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(mesh.num_nodes(), basis.total());
  const auto& ba = basis.block(ProfileBlock::A);
  const auto& bb = basis.block(ProfileBlock::B);
  const int oa = basis.offset(ProfileBlock::A), ob = basis.offset(ProfileBlock::B);
  double va[8], vb[8];
  for (const auto& q : plasma_quadrature(mesh, flux)) {
    const double x = std::clamp(q.psibar, 0.0, 1.0);
    const double r = q.p.x();
    const int fa = oa + ba.nonzero_values(x, va);
    const int fb = ob + bb.nonzero_values(x, vb);
    const auto& tri = mesh.triangle(q.triangle);
    for (int i = 0; i < 3; ++i) {
      const double wa = q.weight * q.bary[i] * r / R0;
      const double wb = q.weight * q.bary[i] * R0 / r;
      for (int j = 0; j <= ba.degree(); ++j) D(tri[i], fa + j) += wa * va[j];
      for (int j = 0; j <= bb.degree(); ++j) D(tri[i], fb + j) += wb * vb[j];
    }
  }
  return D;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const FluxState& flux, const std::function<double(double)>& A,
                              const std::function<double(double)>& B, double R0) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (const auto& q : plasma_quadrature(mesh, flux)) {
    const double x = std::clamp(q.psibar, 0.0, 1.0);
    const double r = q.p.x();
    const double j = (r / R0) * A(x) + (R0 / r) * B(x);
    const auto& tri = mesh.triangle(q.triangle);
    for (int i = 0; i < 3; ++i) load[tri[i]] += q.weight * q.bary[i] * j;
  }
  return load;
}

FluxState seed_flux(const Mesh& mesh, const StiffnessOperator& op, const Eigen::VectorXd& h, double Ip) {
  if (!(Ip > 0.0)) throw config_error("plasma current must be positive");
  Point c = Point::Zero();
  Point lo = mesh.node(0), hi = mesh.node(0);
  for (int t = 0; t < mesh.num_triangles(); ++t) c += mesh.area(t) * mesh.centroid(t);
  c /= mesh.total_area();
  for (const auto& p : mesh.nodes()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double rho = 0.25 * (hi - lo).minCoeff();
  Eigen::VectorXd shape = Eigen::VectorXd::Zero(mesh.num_nodes());
  double disc_area = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if ((mesh.centroid(t) - c).norm() > rho) continue;
    disc_area += mesh.area(t);
    for (int v : mesh.triangle(t)) shape[v] += mesh.area(t) / 3.0;
  }
  if (disc_area == 0.0) throw geometry_error("mesh too coarse for a seed current");
  const Eigen::VectorXd shape_int = restrict_to_interior(mesh, shape);
  double current = Ip;
  for (int attempt = 0;; ++attempt) {
    const Eigen::VectorXd psi = solve_with_dirichlet(mesh, op, (current / disc_area) * shape_int, h);
    try {
      return analyze_flux(mesh, psi);
    } catch (const Error& e) {
      if (attempt == 3 || e.kind() != ErrorKind::Topology) throw;
    }
    current *= 4.0;
  }
}

double relative_change(const FluxState& next, const Eigen::VectorXd& previous) {
  return (next.psi - previous).cwiseAbs().maxCoeff() / std::abs(next.psi_axis() - next.psi_b());
}

void write_triplets(const SparseMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace gsrecon
