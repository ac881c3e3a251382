#include "steklov/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace steklov;

namespace {

SteklovProblem square_problem(int n, int degree = 1)
{
   SteklovProblem pb;
   pb.mesh = std::make_shared<const Mesh>(generate_unit_square(n));
   pb.degree = degree;
   return pb;
}

} // namespace

TEST(Steklov, SquareTableColumn)
{
   const SteklovResult r = solve_steklov(square_problem(10));
   EXPECT_EQ(r.n_dofs, 242u);
   const double expected[] = {2.800192, 2.872823, 2.966591, 3.734775, 5.480897, 5.860259, 6.84993};
   ASSERT_EQ(r.modes.kappas.size(), 7u);
   for (int i = 0; i < 7; ++i)
      EXPECT_NEAR(r.modes.kappas[i], expected[i], 1e-5);
   EXPECT_EQ(r.zero_mode_count, 3);
   EXPECT_LT(r.zero_mode_angle, 1e-7);
   EXPECT_TRUE(r.warnings.empty());
   for (double w : r.modes.omegas)
      EXPECT_GT(w, 0.0);
}

TEST(Steklov, CubeZeroModes)
{
   SteklovProblem pb;
   pb.mesh = std::make_shared<const Mesh>(generate_unit_cube(2));
   pb.material = ElasticMaterial(1, 1, 3);
   pb.n_eigs = 3;
   const SteklovResult r = solve_steklov(pb);
   EXPECT_EQ(r.zero_mode_count, 6);
   EXPECT_LT(r.zero_mode_angle, 1e-7);
}

TEST(Steklov, MatrixIdentityEqualsScalar)
{
   SteklovProblem          a = square_problem(6);
   SteklovProblem          b = a;
   BoundaryWeight::Matrix3 id{};
   id[0][0] = id[1][1] = 1.0;
   b.weight = BoundaryWeight::matrix(2, id);
   const SteklovSystem sa = assemble_system(a), sb = assemble_system(b);
   EXPECT_EQ(sa.boundary_mass.col_idx(), sb.boundary_mass.col_idx());
   for (std::size_t i = 0; i < sa.boundary_mass.nnz(); ++i)
      EXPECT_NEAR(sa.boundary_mass.values()[i], sb.boundary_mass.values()[i], 1e-15);
   const auto ra = solve_steklov(a, sa), rb = solve_steklov(b, sb);
   for (std::size_t i = 0; i < ra.modes.kappas.size(); ++i)
      EXPECT_NEAR(ra.modes.kappas[i], rb.modes.kappas[i], 1e-12);
}

TEST(Steklov, GlidingDiagonalWeight)
{
   SteklovProblem          pb = square_problem(8);
   BoundaryWeight::Matrix3 m{};
   m[0][0] = 1.0;
   m[1][1] = 2.0;
   pb.weight = BoundaryWeight::matrix(2, m);
   const auto r = solve_steklov(pb);
   EXPECT_TRUE(r.modes.converged);
   for (double w : r.modes.omegas)
      EXPECT_GT(w, 0.0);
}

TEST(Steklov, ScalingLaw)
{
   SteklovProblem a = square_problem(10);
   SteklovProblem b = a;
   b.weight = BoundaryWeight::scalar(2.0);
   const auto ra = solve_steklov(a), rb = solve_steklov(b);
   for (std::size_t i = 0; i < ra.modes.omegas.size(); ++i)
      EXPECT_NEAR(rb.modes.omegas[i], ra.modes.omegas[i] / 2.0, 1e-9 * ra.modes.omegas[i]);
}

TEST(Steklov, BOrthogonality)
{
   SteklovProblem      pb = square_problem(10);
   const SteklovSystem sys = assemble_system(pb);
   const auto          r = solve_steklov(pb, sys);
   EXPECT_LT(check_b_orthogonality(r.modes, sys.boundary_mass), 1e-8);

   // Zero modes against the first nonzero mode.
   std::vector<std::vector<double>> v = r.zero_vectors;
   v.push_back(r.modes.vectors.front());
   const std::vector<std::vector<int>> groups{{0, 1, 2}, {3}};
   EXPECT_LT(check_b_orthogonality(v, groups, sys.boundary_mass), 1e-8);
}

TEST(Steklov, SameGroupPairsExcluded)
{
   const CsrMatrix                  b = CsrMatrix::identity(2);
   std::vector<std::vector<double>> v{{1, 0}, {1, 1}};
   EXPECT_NEAR(check_b_orthogonality(v, {{0, 1}}, b), 0.0, 0.0);
   EXPECT_NEAR(check_b_orthogonality(v, {{0}, {1}}, b), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Steklov, RayleighMatchesSolver)
{
   SteklovProblem      pb = square_problem(8);
   const SteklovSystem sys = assemble_system(pb);
   const auto          r = solve_steklov(pb, sys);
   for (std::size_t i = 0; i < r.modes.kappas.size(); ++i)
      EXPECT_NEAR(rayleigh_quotient(sys.stiffness, sys.boundary_mass, r.modes.vectors[i]), r.modes.kappas[i],
                  10 * pb.tol * r.modes.kappas[i]);
}

TEST(Korn, SquareEstimates)
{
   const KornEstimate k4 = estimate_korn_constant(generate_unit_square(4), 1);
   EXPECT_GT(k4.c_h, 0.0);
   EXPECT_TRUE(std::isfinite(k4.c_h));
   EXPECT_NEAR(k4.c_h, 1.0 / std::sqrt(k4.lambda_min), 1e-12);
   EXPECT_EQ(k4.form, "squared-sum");
   // Translation witness: ||u||_1^2 / (||eps||^2 + ||u||_boundary^2) = 1/4.
   EXPECT_GE(k4.c_h * k4.c_h, 0.25);

   double prev = 0.0;
   for (int n : {4, 8, 16}) {
      const double c = estimate_korn_constant(generate_unit_square(n), 1).c_h;
      EXPECT_GE(c, prev - 1e-8);
      prev = c;
   }
   const double alpha = k4.alpha(ElasticMaterial(1, 1), 1.0, 2);
   EXPECT_NEAR(alpha, 1.0 / (2 * k4.c_h * k4.c_h), 1e-15);
}

TEST(Regularity, Roots)
{
   const RegularityInfo l = regularity_root(1.5 * std::numbers::pi);
   EXPECT_NEAR(l.r1, 0.5445, 5e-5);
   EXPECT_LT(std::abs(l.residual()), 1e-12);
   EXPECT_NEAR(l.predicted_rate(1), 2 * l.r1, 1e-15);

   const RegularityInfo c = regularity_root(0.5 * std::numbers::pi);
   EXPECT_EQ(c.r1, 1.0);
   EXPECT_EQ(c.predicted_rate(1), 2.0);
   EXPECT_EQ(c.predicted_rate(2), 2.0);

   const RegularityInfo s = regularity_root(std::numbers::pi);
   EXPECT_EQ(s.r1, 1.0);
   EXPECT_TRUE(s.degenerate);

   EXPECT_THROW(regularity_root(0.0), std::invalid_argument);
   EXPECT_THROW(regularity_root(2 * std::numbers::pi), std::invalid_argument);
}

TEST(Regularity, ReentrantAnglesHaveRoots)
{
   for (double deg : {200.0, 240.0, 300.0, 350.0}) {
      const RegularityInfo r = regularity_root(deg * std::numbers::pi / 180.0);
      EXPECT_LT(r.r1, 1.0);
      EXPECT_GT(r.r1, 0.0);
      EXPECT_LT(std::abs(r.residual()), 1e-12);
   }
}
