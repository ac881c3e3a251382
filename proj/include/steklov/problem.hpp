#pragma once

#include "steklov/eigensolver.hpp"
#include "steklov/fem.hpp"
#include "steklov/mesh.hpp"

#include <memory>
#include <string>
#include <vector>

namespace steklov {

/// Traction eigenproblem  -div sigma(u) = 0,  sigma(u) n = w p u  (or w M u),
/// solved in the shifted form a(u, v) = kappa b(u, v) with kappa = w + 1.
struct SteklovProblem
{
   std::shared_ptr<const Mesh> mesh;
   int                         degree = 1;
   ElasticMaterial             material{1.0, 1.0};
   BoundaryWeight              weight = BoundaryWeight::scalar(1.0);
   int                         n_eigs = 7;     // nonzero modes to report
   double                      tol = 1e-10;
   int                         max_restarts = 500;
   std::uint64_t               seed = 0x5EED;
   double                      group_tol = 1e-6;
};

/// Assembled matrices of a problem: K (elasticity), B (boundary mass),
/// A = K + B.
struct SteklovSystem
{
   FunctionSpace space;
   CsrMatrix     stiffness;
   CsrMatrix     boundary_mass;
   CsrMatrix     shifted;
};

SteklovSystem assemble_system(const SteklovProblem& problem);

/// Number of rigid motions in dimension d: d(d+1)/2.
constexpr int rigid_motion_count(int dim) { return dim * (dim + 1) / 2; }

struct SteklovResult
{
   EigenSolveResult                 modes;         // nonzero modes, kappa ascending
   std::vector<double>              zero_kappas;
   std::vector<std::vector<double>> zero_vectors;
   std::vector<double>              zero_residuals;
   int                              zero_mode_count = 0;
   double                           zero_mode_angle = 0.0;   // radians, H1 Gram inner product
   std::size_t                      n_dofs = 0;
   double                           h = 0.0;
   std::vector<std::string>         warnings;
};

/// Solves the discrete problem, strips the rigid-motion cluster (kappa = 1)
/// and reports it as diagnostics.
SteklovResult solve_steklov(const SteklovProblem& problem);
SteklovResult solve_steklov(const SteklovProblem& problem, const SteklovSystem& system);

/// Largest angle between span(vectors) and the rigid motions, measured in
/// the inner product of `gram`.
double subspace_angle_to_rigid_motions(const FunctionSpace& space, const CsrMatrix& gram,
                                       const std::vector<std::vector<double>>& vectors);

/// Max |x_i^T B x_j| over pairs in different groups, after scaling each
/// vector to x^T B x = 1.
double check_b_orthogonality(const std::vector<std::vector<double>>& vectors,
                             const std::vector<std::vector<int>>& groups, const CsrMatrix& b);
double check_b_orthogonality(const EigenSolveResult& result, const CsrMatrix& b);

/// Discrete Korn constant for F(u) = ||u||_{0,boundary} in squared-sum form:
///   ||u||_1 <= C_h (||eps(u)||^2 + ||u||_{0,boundary}^2)^{1/2}.
struct KornEstimate
{
   double      c_h = 0.0;
   double      lambda_min = 0.0;   // smallest eigenvalue of (E + B1) x = lambda G x
   std::string form = "squared-sum";

   /// Ellipticity estimate alpha_h = min{p0, 2 mu, d (lambda + 2 mu / d)} / (2 C_h^2).
   double alpha(const ElasticMaterial& mat, double p0, int dim) const;
};

KornEstimate estimate_korn_constant(const Mesh& mesh, int degree);

/// First root in (0, 1) of r^2 sin^2(theta) = sin^2(r theta), or 1 if none.
struct RegularityInfo
{
   double theta = 0.0;
   double r1 = 1.0;
   bool   degenerate = false;   // sin(theta) == 0

   double predicted_rate(int degree) const { return 2.0 * std::min<double>(degree, r1); }
   double residual() const;
};

RegularityInfo regularity_root(double theta);

} // namespace steklov
