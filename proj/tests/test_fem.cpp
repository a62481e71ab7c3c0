#include "doctest.h"
#include "test_util.hpp"

#include "gsrecon/cases.hpp"

#include <random>
#include <sstream>

using namespace gsrecon;

namespace {

Mesh square_mesh(double h) { return generate_vessel_mesh({{1, -0.5}, {2, -0.5}, {2, 0.5}, {1, 0.5}}, h); }

Eigen::VectorXd on_boundary(const Mesh& m, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd h(m.num_boundary());
  for (int k = 0; k < m.num_boundary(); ++k) h[k] = f(m.node(m.boundary_nodes()[k]));
  return h;
}

// Nodal load int src * phi_i with the 3-point edge-midpoint rule (exact for quadratics).
Eigen::VectorXd midpoint_load(const Mesh& m, const std::function<double(const Point&)>& src) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(m.num_nodes());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(t);
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      const double v = src(0.5 * (m.node(a) + m.node(b))) * m.area(t) / 3.0;
      load[a] += 0.5 * v;
      load[b] += 0.5 * v;
    }
  }
  return load;
}

double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST_CASE("single element stiffness matches the hand computation") {
  std::istringstream in("3 1 3\n1 0\n2 0\n1 1\n0 1 2\n0\n1\n2\n");
  const Mesh m = parse_mesh(in);
  Eigen::Matrix3d gram;
  gram << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  const Eigen::Matrix3d expected = 0.5 / (kMu0 * 4.0 / 3.0) * gram;
  const Eigen::Matrix3d K = local_stiffness(m, 0);
  CHECK((K - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("stiffness is symmetric with zero row sums") {
  const Mesh m = ReferenceMachine{}.mesh(0.1);
  const SparseMatrix full = assemble_full_stiffness(m);
  const SparseMatrix diff = full - SparseMatrix(full.transpose());
  CHECK(diff.norm() == 0.0);
  const Eigen::VectorXd sums = full * Eigen::VectorXd::Ones(m.num_nodes());
  double scale = 0.0;
  for (int k = 0; k < full.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(full, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  CHECK(sums.lpNorm<Eigen::Infinity>() <= 1e-10 * scale);

  const StiffnessOperator op = assemble_stiffness(m);
  CHECK((op.interior - SparseMatrix(op.interior.transpose())).norm() == 0.0);
  CHECK(op.interior.rows() == m.num_interior());
  CHECK(op.coupling.cols() == m.num_boundary());
}

TEST_CASE("interior stiffness is positive definite on a small mesh") {
  const Mesh m = square_mesh(0.2);
  const StiffnessOperator op = assemble_stiffness(m);
  const Eigen::MatrixXd dense(op.interior);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("constant boundary flux with no load stays constant") {
  const Mesh m = ReferenceMachine{}.mesh(0.1);
  const StiffnessOperator op = assemble_stiffness(m);
  const Eigen::VectorXd psi =
      solve_with_dirichlet(m, op, Eigen::VectorXd::Zero(m.num_interior()), Eigen::VectorXd::Constant(m.num_boundary(), 2.5));
  CHECK((psi.array() - 2.5).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("solve_with_dirichlet is linear") {
  const Mesh m = ReferenceMachine{}.mesh(0.1);
  const StiffnessOperator op = assemble_stiffness(m);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  auto rnd = [&](int size) { return Eigen::VectorXd(Eigen::VectorXd::NullaryExpr(size, [&] { return n(rng); })); };
  const Eigen::VectorXd l1 = rnd(m.num_interior()), l2 = rnd(m.num_interior());
  const Eigen::VectorXd h1 = rnd(m.num_boundary()), h2 = rnd(m.num_boundary());
  const Eigen::VectorXd sum = solve_with_dirichlet(m, op, l1 + l2, h1 + h2);
  const Eigen::VectorXd parts = solve_with_dirichlet(m, op, l1, h1) + solve_with_dirichlet(m, op, l2, h2);
  CHECK((sum - parts).norm() <= 1e-10 * sum.norm());
}

TEST_CASE("discrete maximum principle") {
  const ReferenceMachine machine;
  for (double h : {0.1, 0.055}) {
    const Mesh m = machine.mesh(h);
    const StiffnessOperator op = assemble_stiffness(m);
    const Eigen::VectorXd b = machine.boundary_flux(m);
    const Eigen::VectorXd psi = solve_with_dirichlet(m, op, Eigen::VectorXd::Zero(m.num_interior()), b);
    CHECK(psi.minCoeff() >= b.minCoeff() - 1e-12 * b.cwiseAbs().maxCoeff());
    CHECK(psi.maxCoeff() <= b.maxCoeff() + 1e-12 * b.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("manufactured quartic flux converges at second order") {
  // psi = r^4: Delta* psi = d/dr (4 r^2 / mu0) = 8 r / mu0.
  auto exact = [](const Point& p) { return std::pow(p.x(), 4); };
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025}) {
    const Mesh m = square_mesh(h);
    const StiffnessOperator op = assemble_stiffness(m);
    const Eigen::VectorXd load = midpoint_load(m, [](const Point& p) { return -8.0 * p.x() / kMu0; });
    const Eigen::VectorXd psi = solve_with_dirichlet(m, op, restrict_to_interior(m, load), on_boundary(m, exact));
    err.push_back(l2_error(m, psi, exact));
  }
  MESSAGE("quartic L2 errors " << err[0] << " " << err[1] << " " << err[2]);
  for (int k = 0; k < 2; ++k) {
    CHECK(observed_order(err[k], err[k + 1]) >= 1.8);
    CHECK(observed_order(err[k], err[k + 1]) <= 2.2);
  }
}

TEST_CASE("Soloviev flux converges at second order") {
  const Soloviev s;
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025}) {
    const SyntheticCase c = soloviev_case(s, h);
    err.push_back(l2_error(*c.mesh, c.flux.psi, [&](const Point& p) { return s.psi(p); }));
  }
  MESSAGE("Soloviev L2 errors " << err[0] << " " << err[1] << " " << err[2]);
  for (int k = 0; k < 2; ++k) {
    CHECK(observed_order(err[k], err[k + 1]) >= 1.8);
    CHECK(observed_order(err[k], err[k + 1]) <= 2.2);
  }
}

TEST_CASE("current matrix") {
  const SyntheticCase c = soloviev_case(Soloviev{}, 0.1);
  const Mesh& m = *c.mesh;
  const ProfileBasis basis;
  const double R0 = c.truth.R0;

  SUBCASE("density columns are zero") {
    const Eigen::MatrixXd D = assemble_current_matrix(m, c.flux, basis, R0);
    CHECK(D.cols() == basis.total());
    CHECK(D.middleCols(basis.offset(ProfileBlock::Ne), basis.count(ProfileBlock::Ne)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(D.leftCols(basis.offset(ProfileBlock::Ne)).cwiseAbs().maxCoeff() > 0.0);
  }

  SUBCASE("empty plasma gives a zero matrix") {
    FluxState empty = c.flux;
    std::fill(empty.mask.begin(), empty.mask.end(), 0.0);
    CHECK(assemble_current_matrix(m, empty, basis, R0).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("one fully covered triangle against hand quadrature") {
    FluxState one = c.flux;
    const int t = m.num_triangles() / 3;
    std::fill(one.mask.begin(), one.mask.end(), 0.0);
    for (auto& cell : one.cut_cells) cell.clear();
    one.mask[t] = 1.0;
    const Eigen::MatrixXd D = assemble_current_matrix(m, one, basis, R0);
    // A = 1 is the sum of the A-block columns.
    const Eigen::VectorXd col = D.middleCols(basis.offset(ProfileBlock::A), basis.count(ProfileBlock::A)).rowwise().sum();
    const auto& tri = m.triangle(t);
    for (int k = 0; k < 3; ++k) {
      // int_T r phi_k with the edge-midpoint rule (exact for quadratics).
      double v = 0.0;
      for (int e = 0; e < 3; ++e) {
        const int a = tri[e], b = tri[(e + 1) % 3];
        const double phi = (a == tri[k] ? 0.5 : 0.0) + (b == tri[k] ? 0.5 : 0.0);
        v += 0.5 * (m.node(a).x() + m.node(b).x()) * phi * m.area(t) / 3.0;
      }
      CHECK(col[tri[k]] == doctest::Approx(v / R0).epsilon(1e-12));
    }
    CHECK(col.cwiseAbs().sum() == doctest::Approx(col[tri[0]] + col[tri[1]] + col[tri[2]]).epsilon(1e-14));
  }
}

TEST_CASE("relative change is normalized by the flux span") {
  const SyntheticCase c = soloviev_case(Soloviev{}, 0.1);
  Eigen::VectorXd prev = c.flux.psi;
  CHECK(relative_change(c.flux, prev) == 0.0);
  const double span = c.flux.psi_axis() - c.flux.psi_b();
  prev[prev.size() / 2] += 0.01 * span;
  CHECK(relative_change(c.flux, prev) == doctest::Approx(0.01));
}
