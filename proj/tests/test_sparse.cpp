#include "steklov/fem.hpp"
#include "steklov/sparse.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

using namespace steklov;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed)
{
   std::mt19937_64                        rng(seed);
   std::uniform_real_distribution<double> u(-1.0, 1.0);
   std::vector<double>                    x(n);
   for (auto& v : x)
      v = u(rng);
   return x;
}

struct SquareSystem
{
   CsrMatrix k, b, a;
};

SquareSystem square_system(int n)
{
   const FunctionSpace space = build_space(generate_unit_square(n), 1);
   SquareSystem        s;
   s.k = assemble_stiffness(space, ElasticMaterial(1.0, 1.0));
   s.b = assemble_boundary_mass(space, BoundaryWeight::scalar(1.0));
   s.a = add(s.k, s.b);
   return s;
}

} // namespace

TEST(Sparse, IdentityMatvec)
{
   const auto x = random_vector(7, 1);
   EXPECT_EQ(CsrMatrix::identity(7) * x, x);
   EXPECT_THROW(CsrMatrix::identity(6) * x, DimensionMismatch);
}

TEST(Sparse, DenseFixture)
{
   const std::vector<double> d{2, -1, 0, -1, 3, 0.5, 0, 0.5, 4};
   const CsrMatrix           a = CsrMatrix::from_dense(3, d, true);
   EXPECT_EQ(a.nnz(), 7u);
   const std::vector<double> x{1, 2, 3};
   const auto                y = a * x;
   for (int i = 0; i < 3; ++i) {
      double r = 0.0;
      for (int j = 0; j < 3; ++j)
         r += d[i * 3 + j] * x[j];
      EXPECT_DOUBLE_EQ(y[i], r);
   }
   EXPECT_EQ(a.to_dense(), d);
}

TEST(Sparse, SymmetricBilinear)
{
   const auto s = square_system(6);
   const auto x = random_vector(s.a.n(), 2);
   const auto y = random_vector(s.a.n(), 3);
   EXPECT_NEAR(dot(x, s.a * y), dot(y, s.a * x), 1e-13);
   EXPECT_TRUE(s.a.is_symmetric(0.0));
}

TEST(Sparse, BuilderKeepsUpperAndMirrors)
{
   SymmetricBuilder b(3);
   b.add(0, 1, 2.0);
   b.add(1, 0, 100.0);   // lower entries are ignored
   b.add(2, 2, 1.0);
   b.add(0, 1, -2.0);    // sums to zero and is dropped
   b.add(1, 1, 5.0);
   const CsrMatrix a = b.finalize();
   EXPECT_EQ(a.nnz(), 2u);
   EXPECT_EQ(a.at(0, 1), 0.0);
   EXPECT_EQ(a.at(1, 1), 5.0);
}

TEST(Sparse, CsrTextRoundTrip)
{
   const auto      s = square_system(3);
   const CsrMatrix r = read_csr(write_csr(s.a));
   EXPECT_EQ(r.row_ptr(), s.a.row_ptr());
   EXPECT_EQ(r.col_idx(), s.a.col_idx());
   EXPECT_EQ(r.values(), s.a.values());
}

TEST(Sparse, TwoByTwoSolve)
{
   const CsrMatrix a = CsrMatrix::from_dense(2, std::vector<double>{4, 1, 1, 3}, true);
   const auto      f = CholeskyFactor::factorize(a);
   const auto      x = f.solve(std::vector<double>{1, 0});
   EXPECT_NEAR(x[0], 3.0 / 11.0, 1e-15);
   EXPECT_NEAR(x[1], -1.0 / 11.0, 1e-15);
}

TEST(Sparse, ShiftedSystemFactorizes)
{
   const auto s = square_system(4);
   const auto f = CholeskyFactor::factorize(s.a);
   const auto x = random_vector(s.a.n(), 4);
   const auto b = s.a * x;
   const auto y = f.solve(b);
   std::vector<double> r = s.a * y;
   for (std::size_t i = 0; i < r.size(); ++i)
      r[i] -= b[i];
   EXPECT_LE(norm_inf(r), 1e-9 * (s.a.norm_inf() * norm_inf(y) + norm_inf(b)));
   EXPECT_THROW(CholeskyFactor::factorize(s.k), NotPositiveDefinite);
}

TEST(Sparse, FactorIsDeterministic)
{
   const auto s = square_system(5);
   const auto b = random_vector(s.a.n(), 5);
   EXPECT_EQ(CholeskyFactor::factorize(s.a).solve(b), CholeskyFactor::factorize(s.a).solve(b));
}

TEST(Sparse, RcmIsPermutation)
{
   const auto       s = square_system(5);
   std::vector<int> p = reverse_cuthill_mckee(s.a);
   std::sort(p.begin(), p.end());
   for (std::size_t i = 0; i < p.size(); ++i)
      EXPECT_EQ(p[i], static_cast<int>(i));
}

TEST(Sparse, PcgZeroRhs)
{
   const auto s = square_system(3);
   const auto r = pcg_solve(s.a, std::vector<double>(s.a.n(), 0.0), 1e-10, 100);
   EXPECT_EQ(r.iterations, 0);
   for (double v : r.x)
      EXPECT_EQ(v, 0.0);
}

TEST(Sparse, PcgAgreesWithCholesky)
{
   const auto   s = square_system(8);
   const auto   b = random_vector(s.a.n(), 6);
   const double tol = 1e-10;
   const auto   r = pcg_solve(s.a, b, tol, 10000);
   EXPECT_LE(r.relative_residual, tol);
   // Agreement in the residual norm: ||A (x_pcg - x_chol)|| / ||b||.
   const auto          x = CholeskyFactor::factorize(s.a).solve(b);
   const auto          ax = s.a * x;
   const auto          ay = s.a * r.x;
   std::vector<double> d(x.size());
   for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ay[i] - ax[i];
   EXPECT_LE(norm2(d) / norm2(b), 10 * tol);
}

TEST(Sparse, PcgDiagonal)
{
   const std::size_t   n = 12;
   std::vector<double> d(n * n, 0.0);
   for (std::size_t i = 0; i < n; ++i)
      d[i * n + i] = 1.0 + i;
   const auto r = pcg_solve(CsrMatrix::from_dense(n, d, true), random_vector(n, 7), 1e-12, static_cast<int>(n));
   EXPECT_LE(r.iterations, static_cast<int>(n));
}

TEST(Sparse, PcgReportsNonConvergence)
{
   const auto s = square_system(8);
   EXPECT_THROW(pcg_solve(s.a, random_vector(s.a.n(), 8), 1e-14, 2), SolverNotConverged);
}
