#pragma once

#include "steklov/sparse.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace steklov {

struct EigenSolveOptions
{
   int           count = 1;            // number of largest nu to compute
   double        tol = 1e-10;          // residual tolerance, relative to the largest nu
   int           max_restarts = 500;
   std::uint64_t seed = 0x5EED;
   int           block_size = 4;       // should exceed the largest expected multiplicity
   int           max_basis = 0;        // 0 = automatic
   double        group_tol = 1e-6;
};

struct EigenSolveResult
{
   std::vector<double>              nus;        // descending
   std::vector<double>              kappas;     // 1/nu, ascending
   std::vector<double>              omegas;     // kappa - 1
   std::vector<std::vector<double>> vectors;    // A-orthonormal
   std::vector<double>              residuals;  // ||B x - nu A x|| in the A^{-1} norm
   std::vector<std::vector<int>>    multiplicity_groups;
   int                              iterations = 0;   // block expansions
   int                              restarts = 0;
   bool                             converged = false;
};

class EigenNotConverged : public std::runtime_error
{
 public:
   EigenNotConverged(const std::string& what, EigenSolveResult partial)
     : std::runtime_error(what), partial_(std::move(partial))
   {
   }
   const EigenSolveResult& partial() const { return partial_; }

 private:
   EigenSolveResult partial_;
};

/// Largest eigenvalues nu of A^{-1} B for A symmetric positive definite and B
/// symmetric positive semidefinite. Equivalent to the smallest kappa = 1/nu of
/// A x = kappa B x without ever inverting the singular B.
///
/// Runs a thick-restarted block Lanczos iteration on L^{-1} B L^{-T}
/// (A = L L^T) with full reorthogonalization and a seeded random start block.
EigenSolveResult solve_largest(const CsrMatrix& a, const CsrMatrix& b, const EigenSolveOptions& opts);

/// Same with a precomputed factor of A.
EigenSolveResult solve_largest(const CholeskyFactor& factor, const CsrMatrix& b, const EigenSolveOptions& opts);

class TraceVanishes : public std::domain_error
{
 public:
   using std::domain_error::domain_error;
};

/// (x^T (K + B) x) / (x^T B x). Throws TraceVanishes if x^T B x <= 0.
double rayleigh_quotient(const CsrMatrix& k, const CsrMatrix& b, std::span<const double> x);

/// Partition an ascending list into contiguous clusters: consecutive entries
/// join a cluster when their gap is at most group_tol * max(1, kappa).
std::vector<std::vector<int>> group_multiplicities(std::span<const double> kappas, double group_tol);

} // namespace steklov
