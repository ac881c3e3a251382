#include "steklov/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace steklov {

SteklovSystem assemble_system(const SteklovProblem& problem)
{
   if (!problem.mesh)
      throw std::invalid_argument("SteklovProblem: no mesh");
   FunctionSpace space(problem.mesh, problem.degree);
   CsrMatrix     k = assemble_stiffness(space, problem.material);
   CsrMatrix     b = assemble_boundary_mass(space, problem.weight);
   CsrMatrix     a = add(k, b);
   return {std::move(space), std::move(k), std::move(b), std::move(a)};
}

SteklovResult solve_steklov(const SteklovProblem& problem)
{
   return solve_steklov(problem, assemble_system(problem));
}

SteklovResult solve_steklov(const SteklovProblem& problem, const SteklovSystem& sys)
{
   if (problem.n_eigs < 1)
      throw std::invalid_argument("solve_steklov: n_eigs must be >= 1");
   const int dim = problem.mesh->dim();
   const int rigid = rigid_motion_count(dim);

   EigenSolveOptions opts;
   opts.count = std::min<int>(problem.n_eigs + rigid, static_cast<int>(sys.space.n_dofs()));
   opts.tol = problem.tol;
   opts.max_restarts = problem.max_restarts;
   opts.seed = problem.seed;
   opts.block_size = rigid + 1;
   opts.group_tol = problem.group_tol;
   EigenSolveResult full = solve_largest(sys.shifted, sys.boundary_mass, opts);

   SteklovResult out;
   out.n_dofs = sys.space.n_dofs();
   out.h = problem.mesh->h();

   // kappa = 1 exactly for rigid motions; the gap to the first nonzero
   // eigenvalue is O(1), so a loose threshold separates the cluster.
   constexpr double zero_tol = 1e-6;
   EigenSolveResult& modes = out.modes;
   modes.iterations = full.iterations;
   modes.restarts = full.restarts;
   modes.converged = full.converged;
   for (std::size_t i = 0; i < full.kappas.size(); ++i) {
      if (std::abs(full.kappas[i] - 1.0) <= zero_tol) {
         out.zero_kappas.push_back(full.kappas[i]);
         out.zero_vectors.push_back(std::move(full.vectors[i]));
         out.zero_residuals.push_back(full.residuals[i]);
         continue;
      }
      if (static_cast<int>(modes.kappas.size()) >= problem.n_eigs)
         continue;
      modes.nus.push_back(full.nus[i]);
      modes.kappas.push_back(full.kappas[i]);
      modes.omegas.push_back(full.omegas[i]);
      modes.vectors.push_back(std::move(full.vectors[i]));
      modes.residuals.push_back(full.residuals[i]);
   }
   modes.multiplicity_groups = group_multiplicities(modes.kappas, problem.group_tol);
   out.zero_mode_count = static_cast<int>(out.zero_kappas.size());
   if (out.zero_mode_count != rigid)
      out.warnings.push_back("zero-mode count " + std::to_string(out.zero_mode_count) + " differs from " +
                             std::to_string(rigid));
   if (static_cast<int>(modes.kappas.size()) < problem.n_eigs)
      out.warnings.push_back("only " + std::to_string(modes.kappas.size()) + " nonzero modes computed");
   if (!out.zero_vectors.empty())
      out.zero_mode_angle =
        subspace_angle_to_rigid_motions(sys.space, assemble_h1_gram(sys.space), out.zero_vectors);
   return out;
}

namespace {

void gram_orthonormalize(std::vector<std::vector<double>>& vs, const CsrMatrix& gram)
{
   for (std::size_t k = 0; k < vs.size(); ++k) {
      for (int pass = 0; pass < 2; ++pass)
         for (std::size_t l = 0; l < k; ++l) {
            const double proj = gram.bilinear(vs[l], vs[k]);
            for (std::size_t t = 0; t < vs[k].size(); ++t)
               vs[k][t] -= proj * vs[l][t];
         }
      const double nrm = std::sqrt(gram.quadratic(vs[k]));
      for (auto& x : vs[k])
         x /= nrm;
   }
}

} // namespace

double subspace_angle_to_rigid_motions(const FunctionSpace& space, const CsrMatrix& gram,
                                       const std::vector<std::vector<double>>& vectors)
{
   if (vectors.empty())
      return 0.0;
   const auto rm = rigid_motion_basis(space, gram);
   auto       z = vectors;
   gram_orthonormalize(z, gram);

   // Components of each z outside span(rm); sin of the largest principal
   // angle is the norm of that projection.
   std::vector<std::vector<double>> p = z;
   for (auto& pi : p)
      for (int pass = 0; pass < 2; ++pass)
         for (const auto& r : rm) {
            const double c = gram.bilinear(r, pi);
            for (std::size_t t = 0; t < pi.size(); ++t)
               pi[t] -= c * r[t];
         }
   const Eigen::Index k = static_cast<Eigen::Index>(p.size());
   Eigen::MatrixXd    m(k, k);
   for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
         m(i, j) = m(j, i) = gram.bilinear(p[i], p[j]);
   Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
   const double s = std::sqrt(std::clamp(es.eigenvalues().maxCoeff(), 0.0, 1.0));
   return std::asin(s);
}

double check_b_orthogonality(const std::vector<std::vector<double>>& vectors,
                             const std::vector<std::vector<int>>& groups, const CsrMatrix& b)
{
   std::vector<int> group_of(vectors.size(), -1);
   for (std::size_t g = 0; g < groups.size(); ++g)
      for (int i : groups[g])
         group_of.at(i) = static_cast<int>(g);
   std::vector<double> scale(vectors.size());
   for (std::size_t i = 0; i < vectors.size(); ++i) {
      const double bb = b.quadratic(vectors[i]);
      scale[i] = bb > 0.0 ? 1.0 / std::sqrt(bb) : 0.0;
   }
   double worst = 0.0;
   for (std::size_t i = 0; i < vectors.size(); ++i) {
      const auto bx = b * vectors[i];
      for (std::size_t j = i + 1; j < vectors.size(); ++j)
         if (group_of[i] != group_of[j])
            worst = std::max(worst, std::abs(dot(bx, vectors[j])) * scale[i] * scale[j]);
   }
   return worst;
}

double check_b_orthogonality(const EigenSolveResult& result, const CsrMatrix& b)
{
   return check_b_orthogonality(result.vectors, result.multiplicity_groups, b);
}

double KornEstimate::alpha(const ElasticMaterial& mat, double p0, int dim) const
{
   const double c = std::min({p0, 2.0 * mat.mu, dim * (mat.lambda + (2.0 / dim) * mat.mu)});
   return c / (2.0 * c_h * c_h);
}

KornEstimate estimate_korn_constant(const Mesh& mesh, int degree)
{
   const FunctionSpace space = build_space(mesh, degree);
   const CsrMatrix     strain = assemble_strain_gram(space);
   const CsrMatrix     trace = assemble_boundary_mass(space, BoundaryWeight::scalar(1.0));
   const CsrMatrix     gram = assemble_h1_gram(space);

   // Largest eigenvalue of (E + B1)^{-1} G.
   EigenSolveOptions opts;
   opts.count = 1;
   opts.block_size = rigid_motion_count(mesh.dim()) + 1;
   opts.tol = 1e-10;
   const auto res = solve_largest(add(strain, trace), gram, opts);

   KornEstimate k;
   k.lambda_min = 1.0 / res.nus.front();
   k.c_h = std::sqrt(res.nus.front());
   return k;
}

double RegularityInfo::residual() const
{
   const double s = std::sin(theta);
   const double t = std::sin(r1 * theta);
   return r1 * r1 * s * s - t * t;
}

RegularityInfo regularity_root(double theta)
{
   if (!(theta > 0.0 && theta < 2.0 * std::numbers::pi))
      throw std::invalid_argument("regularity_root: theta must lie in (0, 2 pi)");
   RegularityInfo info;
   info.theta = theta;
   const double s = std::sin(theta);
   info.degenerate = std::abs(s) < 1e-14;
   if (info.degenerate)
      return info;

   auto g = [&](double r) {
      const double t = std::sin(r * theta);
      return r * r * s * s - t * t;
   };
   constexpr int grid = 10000;
   double        prev_r = 1.0 / grid;
   double        prev_g = g(prev_r);
   for (int i = 2; i < grid; ++i) {
      const double r = static_cast<double>(i) / grid;
      const double gr = g(r);
      if (gr == 0.0) {
         info.r1 = r;
         return info;
      }
      if ((prev_g < 0.0) != (gr < 0.0)) {
         double lo = prev_r, hi = r, glo = prev_g;
         while (hi - lo > 1e-13) {
            const double mid = 0.5 * (lo + hi);
            const double gm = g(mid);
            if ((gm < 0.0) == (glo < 0.0)) {
               lo = mid;
               glo = gm;
            }
            else
               hi = mid;
         }
         info.r1 = 0.5 * (lo + hi);
         return info;
      }
      prev_r = r;
      prev_g = gr;
   }
   return info;
}

} // namespace steklov
