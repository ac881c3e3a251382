#include "steklov/eigensolver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace steklov {

namespace {

/// y -> L^{-1} P B P^T L^{-T} y, all in permuted ordering.
class TransformedOperator
{
 public:
   TransformedOperator(const CholeskyFactor& factor, const CsrMatrix& b)
     : factor_(factor), b_(b), x_(b.n()), z_(b.n()), t_(b.n())
   {
   }

   void apply(const double* y, double* out)
   {
      const auto&       perm = factor_.permutation();
      const std::size_t n = b_.n();
      std::copy(y, y + n, t_.begin());
      factor_.upper_solve(t_);
      for (std::size_t i = 0; i < n; ++i)
         x_[perm[i]] = t_[i];
      b_.multiply(x_, z_);
      for (std::size_t i = 0; i < n; ++i)
         out[i] = z_[perm[i]];
      factor_.lower_solve(std::span<double>(out, n));
   }

   /// x = P^T L^{-T} y in the original ordering.
   std::vector<double> to_original(const double* y)
   {
      const auto&       perm = factor_.permutation();
      const std::size_t n = b_.n();
      std::copy(y, y + n, t_.begin());
      factor_.upper_solve(t_);
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i)
         x[perm[i]] = t_[i];
      return x;
   }

 private:
   const CholeskyFactor& factor_;
   const CsrMatrix&      b_;
   std::vector<double>   x_, z_, t_;
};

/// Orthonormalize the columns of `block` against basis(:, 0:m) and each
/// other (classical Gram-Schmidt, two passes). Columns that vanish are
/// replaced by fresh random directions.
void orthonormalize_block(const Eigen::MatrixXd& basis, Eigen::Index m, Eigen::MatrixXd& block, std::mt19937_64& rng)
{
   std::normal_distribution<double> normal;
   const Eigen::Index               n = block.rows();
   for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (int attempt = 0; attempt < 5; ++attempt) {
         const double before = block.col(j).norm();
         for (int pass = 0; pass < 2; ++pass) {
            if (m > 0) {
               const Eigen::VectorXd coef = basis.leftCols(m).transpose() * block.col(j);
               block.col(j).noalias() -= basis.leftCols(m) * coef;
            }
            if (j > 0) {
               const Eigen::VectorXd coef = block.leftCols(j).transpose() * block.col(j);
               block.col(j).noalias() -= block.leftCols(j) * coef;
            }
         }
         const double after = block.col(j).norm();
         if (before > 0.0 && after > 1e-10 * before) {
            block.col(j) /= after;
            break;
         }
         for (Eigen::Index i = 0; i < n; ++i)
            block(i, j) = normal(rng);
      }
   }
}

} // namespace

EigenSolveResult solve_largest(const CsrMatrix& a, const CsrMatrix& b, const EigenSolveOptions& opts)
{
   if (a.n() != b.n())
      throw DimensionMismatch("solve_largest: A and B differ in dimension");
   return solve_largest(CholeskyFactor::factorize(a), b, opts);
}

EigenSolveResult solve_largest(const CholeskyFactor& factor, const CsrMatrix& b, const EigenSolveOptions& opts)
{
   const Eigen::Index n = static_cast<Eigen::Index>(b.n());
   if (static_cast<std::size_t>(n) != factor.n())
      throw DimensionMismatch("solve_largest: factor and B differ in dimension");
   if (opts.count < 1 || opts.count > n)
      throw std::invalid_argument("solve_largest: count must be in [1, n]");
   if (opts.block_size < 1)
      throw std::invalid_argument("solve_largest: block size must be positive");

   const Eigen::Index nev = opts.count;
   const Eigen::Index bs = std::min<Eigen::Index>(opts.block_size, n);

   // Basis limits. Outside the full-space case both the maximum basis and
   // the restart size are multiples of the block size.
   Eigen::Index max_basis = opts.max_basis > 0 ? opts.max_basis : std::max(2 * nev + 4 * bs, nev + 40);
   Eigen::Index keep = 0;
   bool         full_space = false;
   if (max_basis + bs >= n) {
      max_basis = n;
      full_space = true;
   }
   else {
      max_basis = ((max_basis + bs - 1) / bs) * bs;
      keep = ((nev + max_basis) / 2 / bs) * bs;
      keep = std::max(keep, ((nev + bs - 1) / bs) * bs);
      if (keep + bs > max_basis)
         max_basis = keep + bs;
   }

   TransformedOperator op(factor, b);
   std::mt19937_64     rng(opts.seed);
   std::normal_distribution<double> normal;

   Eigen::MatrixXd basis(n, max_basis);
   Eigen::MatrixXd image(n, max_basis);
   Eigen::MatrixXd pending(n, bs);
   for (Eigen::Index j = 0; j < bs; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
         pending(i, j) = normal(rng);
   orthonormalize_block(basis, 0, pending, rng);

   EigenSolveResult res;
   Eigen::Index     m = 0;
   Eigen::VectorXd  theta;
   Eigen::MatrixXd  ritz;   // coefficients in basis, descending order
   Eigen::VectorXd  resid;

   auto rayleigh_ritz = [&]() {
      Eigen::MatrixXd h = basis.leftCols(m).transpose() * image.leftCols(m);
      h = 0.5 * (h + h.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
      theta = es.eigenvalues().reverse();
      ritz = es.eigenvectors().rowwise().reverse();
      const Eigen::Index k = std::min(nev, m);
      const Eigen::MatrixXd y = ritz.leftCols(k);
      Eigen::MatrixXd r = image.leftCols(m) * y - basis.leftCols(m) * y * theta.head(k).asDiagonal();
      resid = r.colwise().norm().transpose();
   };
   auto scale = [&]() { return std::max(std::abs(theta(0)), std::numeric_limits<double>::min()); };
   auto converged = [&]() {
      if (m < nev)
         return false;
      if (m == n)
         return true;
      return (resid.array() <= opts.tol * scale()).all();
   };

   for (;;) {
      // Expand by one block.
      const Eigen::Index add = std::min(bs, max_basis - m);
      basis.middleCols(m, add) = pending.leftCols(add);
      for (Eigen::Index j = 0; j < add; ++j)
         op.apply(basis.col(m + j).data(), image.col(m + j).data());
      m += add;
      ++res.iterations;

      if (m < n) {
         pending = image.middleCols(m - add, add);
         if (add < bs) {
            pending.conservativeResize(n, bs);
            for (Eigen::Index j = add; j < bs; ++j)
               for (Eigen::Index i = 0; i < n; ++i)
                  pending(i, j) = normal(rng);
         }
         orthonormalize_block(basis, m, pending, rng);
      }

      if (m >= nev) {
         rayleigh_ritz();
         if (converged())
            break;
      }
      if (m < max_basis)
         continue;
      if (full_space)
         break;   // cannot happen: the full space gives exact Ritz pairs

      if (res.restarts >= opts.max_restarts) {
         res.converged = false;
         break;
      }
      // Thick restart onto the leading `keep` Ritz vectors; `pending` stays
      // orthogonal to the smaller basis.
      const Eigen::MatrixXd y = ritz.leftCols(keep);
      const Eigen::MatrixXd new_basis = basis.leftCols(m) * y;
      const Eigen::MatrixXd new_image = image.leftCols(m) * y;
      basis.leftCols(keep) = new_basis;
      image.leftCols(keep) = new_image;
      m = keep;
      ++res.restarts;
   }

   const Eigen::Index k = std::min(nev, m);
   res.converged = converged();
   for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::VectorXd y = basis.leftCols(m) * ritz.col(i);
      const double          nu = theta(i);
      res.nus.push_back(nu);
      res.kappas.push_back(nu > 0.0 ? 1.0 / nu : std::numeric_limits<double>::infinity());
      res.omegas.push_back(res.kappas.back() - 1.0);
      res.vectors.push_back(op.to_original(y.data()));
      res.residuals.push_back(m == n ? 0.0 : resid(i));
   }
   if (m == n) {
      // Full space: report the true residuals of the Ritz pairs.
      for (Eigen::Index i = 0; i < k; ++i) {
         const Eigen::VectorXd y = basis.leftCols(m) * ritz.col(i);
         const Eigen::VectorXd r = image.leftCols(m) * ritz.col(i) - theta(i) * y;
         res.residuals[i] = r.norm();
      }
   }
   res.multiplicity_groups = group_multiplicities(res.kappas, opts.group_tol);
   if (!res.converged)
      throw EigenNotConverged("solve_largest: no convergence after " + std::to_string(res.restarts) + " restarts",
                              std::move(res));
   return res;
}

double rayleigh_quotient(const CsrMatrix& k, const CsrMatrix& b, std::span<const double> x)
{
   const double bx = b.quadratic(x);
   if (!(bx > 0.0))
      throw TraceVanishes("rayleigh_quotient: x^T B x <= 0 (field vanishes on the boundary)");
   return (k.quadratic(x) + bx) / bx;
}

std::vector<std::vector<int>> group_multiplicities(std::span<const double> kappas, double group_tol)
{
   std::vector<std::vector<int>> groups;
   for (std::size_t i = 0; i < kappas.size(); ++i) {
      if (i > 0 && std::abs(kappas[i] - kappas[i - 1]) <= group_tol * std::max(1.0, std::abs(kappas[i])))
         groups.back().push_back(static_cast<int>(i));
      else
         groups.push_back({static_cast<int>(i)});
   }
   return groups;
}

} // namespace steklov
