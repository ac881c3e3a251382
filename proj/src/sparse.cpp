#include "steklov/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <queue>
#include <sstream>

namespace steklov {

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<int> col_idx,
                     std::vector<double> values, bool symmetric)
  : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)),
    symmetric_(symmetric)
{
   if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
       col_idx_.size() != values_.size())
      throw std::invalid_argument("CsrMatrix: inconsistent array sizes");
   for (std::size_t r = 0; r < n_; ++r) {
      if (row_ptr_[r] > row_ptr_[r + 1])
         throw std::invalid_argument("CsrMatrix: row_ptr not monotone");
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
         if (col_idx_[k] < 0 || static_cast<std::size_t>(col_idx_[k]) >= n_)
            throw std::invalid_argument("CsrMatrix: column index out of range");
         if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1])
            throw std::invalid_argument("CsrMatrix: columns not sorted and unique");
      }
   }
}

CsrMatrix CsrMatrix::identity(std::size_t n)
{
   std::vector<std::size_t> rp(n + 1);
   std::vector<int>         ci(n);
   for (std::size_t i = 0; i < n; ++i) {
      rp[i + 1] = i + 1;
      ci[i] = static_cast<int>(i);
   }
   return CsrMatrix(n, std::move(rp), std::move(ci), std::vector<double>(n, 1.0), true);
}

CsrMatrix CsrMatrix::from_dense(std::size_t n, std::span<const double> dense, bool symmetric)
{
   if (dense.size() != n * n)
      throw DimensionMismatch("from_dense: expected n*n entries");
   std::vector<std::size_t> rp{0};
   std::vector<int>         ci;
   std::vector<double>      v;
   for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c)
         if (dense[r * n + c] != 0.0) {
            ci.push_back(static_cast<int>(c));
            v.push_back(dense[r * n + c]);
         }
      rp.push_back(ci.size());
   }
   return CsrMatrix(n, std::move(rp), std::move(ci), std::move(v), symmetric);
}

double CsrMatrix::at(std::size_t r, std::size_t c) const
{
   const auto begin = col_idx_.begin() + row_ptr_[r];
   const auto end = col_idx_.begin() + row_ptr_[r + 1];
   const auto it = std::lower_bound(begin, end, static_cast<int>(c));
   if (it == end || *it != static_cast<int>(c))
      return 0.0;
   return values_[it - col_idx_.begin()];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
   if (x.size() != n_ || y.size() != n_)
      throw DimensionMismatch("matvec: dimension mismatch");
   for (std::size_t r = 0; r < n_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
         s += values_[k] * x[col_idx_[k]];
      y[r] = s;
   }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const
{
   std::vector<double> y(n_);
   multiply(x, y);
   return y;
}

double CsrMatrix::bilinear(std::span<const double> x, std::span<const double> y) const
{
   if (x.size() != n_ || y.size() != n_)
      throw DimensionMismatch("bilinear: dimension mismatch");
   double s = 0.0;
   for (std::size_t r = 0; r < n_; ++r) {
      double t = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
         t += values_[k] * y[col_idx_[k]];
      s += x[r] * t;
   }
   return s;
}

double CsrMatrix::norm_inf() const
{
   double best = 0.0;
   for (std::size_t r = 0; r < n_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
         s += std::abs(values_[k]);
      best = std::max(best, s);
   }
   return best;
}

std::vector<double> CsrMatrix::diagonal() const
{
   std::vector<double> d(n_, 0.0);
   for (std::size_t r = 0; r < n_; ++r)
      d[r] = at(r, r);
   return d;
}

bool CsrMatrix::is_symmetric(double tol) const
{
   for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
         const std::size_t c = col_idx_[k];
         if (std::abs(values_[k] - at(c, r)) > tol)
            return false;
      }
   return true;
}

std::vector<double> CsrMatrix::to_dense() const
{
   std::vector<double> d(n_ * n_, 0.0);
   for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
         d[r * n_ + col_idx_[k]] = values_[k];
   return d;
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta)
{
   if (a.n() != b.n())
      throw DimensionMismatch("add: dimension mismatch");
   const std::size_t        n = a.n();
   std::vector<std::size_t> rp{0};
   std::vector<int>         ci;
   std::vector<double>      v;
   ci.reserve(a.nnz() + b.nnz());
   v.reserve(a.nnz() + b.nnz());
   for (std::size_t r = 0; r < n; ++r) {
      std::size_t i = a.row_ptr()[r], ie = a.row_ptr()[r + 1];
      std::size_t j = b.row_ptr()[r], je = b.row_ptr()[r + 1];
      while (i < ie || j < je) {
         int    c;
         double val;
         if (j == je || (i < ie && a.col_idx()[i] < b.col_idx()[j])) {
            c = a.col_idx()[i];
            val = alpha * a.values()[i++];
         }
         else if (i == ie || b.col_idx()[j] < a.col_idx()[i]) {
            c = b.col_idx()[j];
            val = beta * b.values()[j++];
         }
         else {
            c = a.col_idx()[i];
            val = alpha * a.values()[i++] + beta * b.values()[j++];
         }
         if (val != 0.0) {
            ci.push_back(c);
            v.push_back(val);
         }
      }
      rp.push_back(ci.size());
   }
   return CsrMatrix(n, std::move(rp), std::move(ci), std::move(v), a.symmetric() && b.symmetric());
}

CsrMatrix SymmetricBuilder::finalize() const
{
   std::vector<Entry> sorted = entries_;
   std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& x, const Entry& y) {
      return x.row != y.row ? x.row < y.row : x.col < y.col;
   });

   // Upper triangle with duplicates summed in insertion order.
   std::vector<Entry> upper;
   for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      double      s = 0.0;
      while (j < sorted.size() && sorted[j].row == sorted[i].row && sorted[j].col == sorted[i].col)
         s += sorted[j++].value;
      if (s != 0.0)
         upper.push_back({sorted[i].row, sorted[i].col, s});
      i = j;
   }

   std::vector<std::size_t> count(n_ + 1, 0);
   for (const auto& e : upper) {
      ++count[e.row + 1];
      if (e.row != e.col)
         ++count[e.col + 1];
   }
   for (std::size_t r = 0; r < n_; ++r)
      count[r + 1] += count[r];
   std::vector<int>         ci(count[n_]);
   std::vector<double>      v(count[n_]);
   std::vector<std::size_t> fill(count.begin(), count.end() - 1);
   // Lower entries of row r come from earlier upper rows, so visiting the
   // upper list in (row, col) order keeps every row sorted.
   for (const auto& e : upper) {
      if (e.row != e.col) {
         ci[fill[e.col]] = e.row;
         v[fill[e.col]++] = e.value;
      }
      ci[fill[e.row]] = e.col;
      v[fill[e.row]++] = e.value;
   }
   return CsrMatrix(n_, std::move(count), std::move(ci), std::move(v), true);
}

std::string write_csr(const CsrMatrix& a)
{
   std::ostringstream os;
   os << std::setprecision(17);
   os << "csr " << a.n() << ' ' << a.nnz() << '\n';
   for (std::size_t i = 0; i < a.row_ptr().size(); ++i)
      os << (i ? " " : "") << a.row_ptr()[i];
   os << '\n';
   for (std::size_t i = 0; i < a.nnz(); ++i)
      os << (i ? " " : "") << a.col_idx()[i];
   os << '\n';
   for (std::size_t i = 0; i < a.nnz(); ++i)
      os << (i ? " " : "") << a.values()[i];
   os << '\n';
   return os.str();
}

CsrMatrix read_csr(std::string_view text)
{
   std::istringstream is{std::string(text)};
   std::string        tag;
   std::size_t        n = 0, nnz = 0;
   if (!(is >> tag >> n >> nnz) || tag != "csr")
      throw std::invalid_argument("read_csr: malformed header");
   std::vector<std::size_t> rp(n + 1);
   std::vector<int>         ci(nnz);
   std::vector<double>      v(nnz);
   for (auto& x : rp)
      if (!(is >> x))
         throw std::invalid_argument("read_csr: truncated row_ptr");
   for (auto& x : ci)
      if (!(is >> x))
         throw std::invalid_argument("read_csr: truncated col_idx");
   for (auto& x : v)
      if (!(is >> x))
         throw std::invalid_argument("read_csr: truncated values");
   CsrMatrix m(n, std::move(rp), std::move(ci), std::move(v), false);
   const bool sym = m.is_symmetric();
   return CsrMatrix(n, m.row_ptr(), m.col_idx(), m.values(), sym);
}

NotPositiveDefinite::NotPositiveDefinite(std::size_t row, double pivot)
  : std::runtime_error("matrix is not positive definite (pivot " + std::to_string(pivot) + " at row " +
                       std::to_string(row) + ")"),
    row_(row)
{
}

std::vector<int> reverse_cuthill_mckee(const CsrMatrix& a)
{
   const int        n = static_cast<int>(a.n());
   const auto&      rp = a.row_ptr();
   const auto&      ci = a.col_idx();
   std::vector<int> degree(n);
   for (int i = 0; i < n; ++i)
      degree[i] = static_cast<int>(rp[i + 1] - rp[i]);

   std::vector<int> level(n, -1);
   // BFS returning the last level set; `level` is scratch.
   auto bfs_last_level = [&](int root, int& depth) {
      std::vector<int> touched{root}, frontier{root};
      level[root] = 0;
      depth = 0;
      std::vector<int> last = frontier;
      while (!frontier.empty()) {
         std::vector<int> next;
         for (int u : frontier)
            for (std::size_t k = rp[u]; k < rp[u + 1]; ++k) {
               const int w = ci[k];
               if (level[w] < 0) {
                  level[w] = level[u] + 1;
                  next.push_back(w);
                  touched.push_back(w);
               }
            }
         if (!next.empty()) {
            last = next;
            ++depth;
         }
         frontier = std::move(next);
      }
      for (int t : touched)
         level[t] = -1;
      return last;
   };

   std::vector<char> visited(n, 0);
   std::vector<int>  order;
   order.reserve(n);
   for (;;) {
      int start = -1;
      for (int i = 0; i < n; ++i)
         if (!visited[i] && (start < 0 || degree[i] < degree[start]))
            start = i;
      if (start < 0)
         break;

      // George-Liu pseudo-peripheral node search.
      int depth = 0;
      auto last = bfs_last_level(start, depth);
      for (int iter = 0; iter < 8; ++iter) {
         int cand = last.front();
         for (int w : last)
            if (degree[w] < degree[cand] || (degree[w] == degree[cand] && w < cand))
               cand = w;
         int  d2 = 0;
         auto last2 = bfs_last_level(cand, d2);
         if (d2 <= depth)
            break;
         start = cand;
         depth = d2;
         last = std::move(last2);
      }

      std::queue<int> q;
      q.push(start);
      visited[start] = 1;
      std::vector<int> nbrs;
      while (!q.empty()) {
         const int u = q.front();
         q.pop();
         order.push_back(u);
         nbrs.clear();
         for (std::size_t k = rp[u]; k < rp[u + 1]; ++k)
            if (!visited[ci[k]])
               nbrs.push_back(ci[k]);
         std::sort(nbrs.begin(), nbrs.end(), [&](int x, int y) {
            return degree[x] != degree[y] ? degree[x] < degree[y] : x < y;
         });
         for (int w : nbrs) {
            visited[w] = 1;
            q.push(w);
         }
      }
   }
   std::reverse(order.begin(), order.end());
   return order;
}

CholeskyFactor CholeskyFactor::factorize(const CsrMatrix& a)
{
   CholeskyFactor f;
   const int      n = static_cast<int>(a.n());
   f.n_ = a.n();
   f.perm_ = reverse_cuthill_mckee(a);
   std::vector<int> inv(n);
   for (int i = 0; i < n; ++i)
      inv[f.perm_[i]] = i;

   const auto& rp = a.row_ptr();
   const auto& ci = a.col_idx();
   const auto& av = a.values();

   f.first_.assign(n, 0);
   for (int i = 0; i < n; ++i) {
      int       lo = i;
      const int old = f.perm_[i];
      for (std::size_t k = rp[old]; k < rp[old + 1]; ++k)
         lo = std::min(lo, inv[ci[k]]);
      f.first_[i] = lo;
   }
   f.start_.assign(n + 1, 0);
   for (int i = 0; i < n; ++i)
      f.start_[i + 1] = f.start_[i] + static_cast<std::size_t>(i - f.first_[i] + 1);
   f.values_.assign(f.start_[n], 0.0);

   for (int i = 0; i < n; ++i) {
      double*   li = f.values_.data() + f.start_[i];
      const int fi = f.first_[i];
      const int old = f.perm_[i];
      double    diag = 0.0;
      for (std::size_t k = rp[old]; k < rp[old + 1]; ++k) {
         const int j = inv[ci[k]];
         if (j <= i)
            li[j - fi] = av[k];
         if (j == i)
            diag = av[k];
      }
      for (int j = fi; j < i; ++j) {
         const double* lj = f.values_.data() + f.start_[j];
         const int     fj = f.first_[j];
         const int     k0 = std::max(fi, fj);
         double        s = li[j - fi];
         for (int k = k0; k < j; ++k)
            s -= li[k - fi] * lj[k - fj];
         li[j - fi] = s / lj[j - fj];
      }
      double d = li[i - fi];
      for (int k = fi; k < i; ++k)
         d -= li[k - fi] * li[k - fi];
      if (!(d > 1e-10 * std::abs(diag)))
         throw NotPositiveDefinite(static_cast<std::size_t>(old), d);
      li[i - fi] = std::sqrt(d);
   }
   return f;
}

void CholeskyFactor::lower_solve(std::span<double> y) const
{
   const int n = static_cast<int>(n_);
   for (int i = 0; i < n; ++i) {
      const double* li = values_.data() + start_[i];
      const int     fi = first_[i];
      double        s = y[i];
      for (int k = fi; k < i; ++k)
         s -= li[k - fi] * y[k];
      y[i] = s / li[i - fi];
   }
}

void CholeskyFactor::upper_solve(std::span<double> y) const
{
   for (int i = static_cast<int>(n_) - 1; i >= 0; --i) {
      const double* li = values_.data() + start_[i];
      const int     fi = first_[i];
      const double  xi = y[i] / li[i - fi];
      y[i] = xi;
      for (int k = fi; k < i; ++k)
         y[k] -= li[k - fi] * xi;
   }
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const
{
   if (b.size() != n_)
      throw DimensionMismatch("solve: dimension mismatch");
   std::vector<double> y(n_);
   for (std::size_t i = 0; i < n_; ++i)
      y[i] = b[perm_[i]];
   lower_solve(y);
   upper_solve(y);
   std::vector<double> x(n_);
   for (std::size_t i = 0; i < n_; ++i)
      x[perm_[i]] = y[i];
   return x;
}

double dot(std::span<const double> x, std::span<const double> y)
{
   double s = 0.0;
   for (std::size_t i = 0; i < x.size(); ++i)
      s += x[i] * y[i];
   return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double norm_inf(std::span<const double> x)
{
   double m = 0.0;
   for (double v : x)
      m = std::max(m, std::abs(v));
   return m;
}

PcgResult pcg_solve(const CsrMatrix& a, std::span<const double> b, double tol, int max_iterations)
{
   const std::size_t n = a.n();
   if (b.size() != n)
      throw DimensionMismatch("pcg_solve: dimension mismatch");
   PcgResult res;
   res.x.assign(n, 0.0);
   const double bnorm = norm2(b);
   if (bnorm == 0.0)
      return res;

   std::vector<double> inv_diag = a.diagonal();
   for (auto& d : inv_diag) {
      if (!(d > 0.0))
         throw SolverNotConverged("pcg_solve: non-positive diagonal", 0);
      d = 1.0 / d;
   }
   std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
   for (std::size_t i = 0; i < n; ++i)
      z[i] = inv_diag[i] * r[i];
   p = z;
   double rz = dot(r, z);
   for (int it = 1; it <= max_iterations; ++it) {
      a.multiply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0))
         throw SolverNotConverged("pcg_solve: breakdown (p^T A p <= 0)", it);
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
         res.x[i] += alpha * p[i];
         r[i] -= alpha * q[i];
      }
      res.iterations = it;
      res.relative_residual = norm2(r) / bnorm;
      if (res.relative_residual <= tol)
         return res;
      for (std::size_t i = 0; i < n; ++i)
         z[i] = inv_diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i)
         p[i] = z[i] + beta * p[i];
   }
   throw SolverNotConverged("pcg_solve: no convergence after " + std::to_string(max_iterations) +
                              " iterations (relative residual " + std::to_string(res.relative_residual) + ")",
                            max_iterations);
}

} // namespace steklov
