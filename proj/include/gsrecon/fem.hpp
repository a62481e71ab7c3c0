#ifndef GSRECON_FEM_HPP
#define GSRECON_FEM_HPP

#include "gsrecon/plasma.hpp"
#include "gsrecon/profiles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <filesystem>
#include <functional>
#include <memory>

namespace gsrecon {

using SparseMatrix = Eigen::SparseMatrix<double>;
using CholeskyFactor = Eigen::SimplicialLLT<SparseMatrix>;

/// Discrete -Delta* with the Dirichlet nodes eliminated.
///
/// `interior` is the interior-interior block, `coupling` the
/// interior-boundary block used for lifting. The Cholesky factor of
/// `interior` is computed once and shared read-only by every forward and
/// adjoint solve.
struct StiffnessOperator {
  SparseMatrix interior;
  SparseMatrix coupling;
  std::shared_ptr<const CholeskyFactor> factor;
};

/// Element matrix (area / (mu0 r_c)) * grad(phi_i) . grad(phi_j), r_c the centroid radius.
Eigen::Matrix3d local_stiffness(const Mesh& mesh, int t);

/// Full nodal operator (interior and boundary rows); rows sum to zero.
SparseMatrix assemble_full_stiffness(const Mesh& mesh);

StiffnessOperator assemble_stiffness(const Mesh& mesh);

/// K^-1 rhs for interior-sized right-hand sides (vector or block of columns).
Eigen::MatrixXd solve_interior(const StiffnessOperator& op, const Eigen::MatrixXd& rhs);

/// Full nodal solution with psi = h on the boundary and K psi_int = load - K_ib h.
Eigen::VectorXd solve_with_dirichlet(const Mesh& mesh, const StiffnessOperator& op, const Eigen::VectorXd& load_interior,
                                     const Eigen::VectorXd& h);

/// Interior rows of a full nodal vector or matrix.
Eigen::MatrixXd restrict_to_interior(const Mesh& mesh, const Eigen::MatrixXd& full);

/// Plasma current matrix over all nodes: column k holds
/// int_{plasma} w_k phi_i with w_k = (r/R0) N_k(psibar) on the A block and
/// (R0/r) N_k(psibar) on the B block. The n_e columns are zero.
Eigen::MatrixXd assemble_current_matrix(const Mesh& mesh, const FluxState& flux, const ProfileBasis& basis, double R0);

/// Nodal load int_{plasma} j(r, psibar) phi_i for prescribed source functions.
Eigen::VectorXd assemble_load(const Mesh& mesh, const FluxState& flux, const std::function<double(double)>& A,
                              const std::function<double(double)>& B, double R0);

/// Starting flux for a cold start: the Dirichlet solve with a uniform
/// current `Ip` in a disc around the area centroid of the domain, with its
/// topology analysed. The disc current is raised if the field shows no axis.
FluxState seed_flux(const Mesh& mesh, const StiffnessOperator& op, const Eigen::VectorXd& h, double Ip);

/// max|psi_new - psi_old| / |psi_axis - psi_b|, normalized by the new state.
double relative_change(const FluxState& next, const Eigen::VectorXd& previous);

/// Writes "i j value" lines (debug aid).
void write_triplets(const SparseMatrix& m, const std::filesystem::path& path);

}  // namespace gsrecon

#endif  // GSRECON_FEM_HPP
