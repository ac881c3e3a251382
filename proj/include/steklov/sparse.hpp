#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace steklov {

class DimensionMismatch : public std::invalid_argument
{
 public:
   using std::invalid_argument::invalid_argument;
};

/// Compressed-row sparse matrix. Column indices are sorted and unique within
/// each row and no explicit zeros are stored.
class CsrMatrix
{
 public:
   CsrMatrix() = default;
   CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<int> col_idx,
             std::vector<double> values, bool symmetric);

   static CsrMatrix identity(std::size_t n);
   static CsrMatrix from_dense(std::size_t n, std::span<const double> dense, bool symmetric);

   std::size_t n() const { return n_; }
   std::size_t nnz() const { return values_.size(); }
   bool symmetric() const { return symmetric_; }

   const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
   const std::vector<int>& col_idx() const { return col_idx_; }
   const std::vector<double>& values() const { return values_; }

   /// Entry lookup by binary search; zero if not stored.
   double at(std::size_t r, std::size_t c) const;

   void multiply(std::span<const double> x, std::span<double> y) const;
   std::vector<double> operator*(std::span<const double> x) const;

   /// x^T A y
   double bilinear(std::span<const double> x, std::span<const double> y) const;
   double quadratic(std::span<const double> x) const { return bilinear(x, x); }

   double norm_inf() const;
   std::vector<double> diagonal() const;

   /// Structural and exact-value symmetry check.
   bool is_symmetric(double tol = 0.0) const;

   std::vector<double> to_dense() const;

 private:
   std::size_t              n_ = 0;
   std::vector<std::size_t> row_ptr_{0};
   std::vector<int>         col_idx_;
   std::vector<double>      values_;
   bool                     symmetric_ = false;
};

/// alpha*A + beta*B with the union sparsity pattern.
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0);

/// Accumulates contributions of a symmetric matrix. Only the upper triangle
/// (row <= col) is kept; finalize() sums duplicates in insertion order and
/// mirrors, so the result is bitwise symmetric and reproducible.
class SymmetricBuilder
{
 public:
   explicit SymmetricBuilder(std::size_t n) : n_(n) {}

   void add(int row, int col, double value)
   {
      if (row <= col)
         entries_.push_back({row, col, value});
   }
   void reserve(std::size_t count) { entries_.reserve(count); }

   CsrMatrix finalize() const;

 private:
   struct Entry
   {
      int    row;
      int    col;
      double value;
   };
   std::size_t        n_;
   std::vector<Entry> entries_;
};

std::string write_csr(const CsrMatrix& a);
CsrMatrix read_csr(std::string_view text);

class NotPositiveDefinite : public std::runtime_error
{
 public:
   NotPositiveDefinite(std::size_t row, double pivot);
   std::size_t row() const { return row_; }

 private:
   std::size_t row_;
};

/// Reverse Cuthill-McKee ordering of the matrix graph. perm[new] = old.
std::vector<int> reverse_cuthill_mckee(const CsrMatrix& a);

/// Envelope (profile) Cholesky factor of P A P^T = L L^T under an RCM ordering.
class CholeskyFactor
{
 public:
   static CholeskyFactor factorize(const CsrMatrix& a);

   std::size_t n() const { return n_; }
   std::size_t envelope_size() const { return values_.size(); }
   const std::vector<int>& permutation() const { return perm_; }

   std::vector<double> solve(std::span<const double> b) const;

   /// In-place L^{-1} y on a vector given in permuted ordering.
   void lower_solve(std::span<double> y) const;
   /// In-place L^{-T} y on a vector given in permuted ordering.
   void upper_solve(std::span<double> y) const;

 private:
   std::size_t              n_ = 0;
   std::vector<int>         perm_;   // perm_[new] = old
   std::vector<int>         first_;  // first stored column of each row
   std::vector<std::size_t> start_;  // offset of row i in values_
   std::vector<double>      values_; // row i holds columns first_[i]..i
};

class SolverNotConverged : public std::runtime_error
{
 public:
   SolverNotConverged(const std::string& what, int iterations)
     : std::runtime_error(what), iterations_(iterations)
   {
   }
   int iterations() const { return iterations_; }

 private:
   int iterations_;
};

struct PcgResult
{
   std::vector<double> x;
   int                 iterations = 0;
   double              relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws SolverNotConverged on
/// breakdown or when `max_iterations` is exhausted.
PcgResult pcg_solve(const CsrMatrix& a, std::span<const double> b, double tol, int max_iterations);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double norm_inf(std::span<const double> x);

} // namespace steklov
