#include "steklov/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace steklov;

namespace {

void expect_outward_normals(const Mesh& m)
{
   for (const auto& f : m.boundary_facets()) {
      const Point cc = m.cell_centroid(f.cell);
      Point       fc{};
      for (int i = 0; i < m.dim(); ++i)
         for (int a = 0; a < 3; ++a)
            fc[a] += m.vertices()[f.vertices[i]][a] / m.dim();
      double len = 0.0, d = 0.0;
      for (int a = 0; a < 3; ++a) {
         len += f.normal[a] * f.normal[a];
         d += f.normal[a] * (fc[a] - cc[a]);
      }
      EXPECT_NEAR(std::sqrt(len), 1.0, 1e-12);
      EXPECT_GT(d, 0.0);
   }
}

double max_h(const Mesh& m)
{
   double h = 0.0;
   for (std::size_t c = 0; c < m.num_cells(); ++c)
      h = std::max(h, m.cell_diameter(c));
   return h;
}

} // namespace

TEST(Mesh, SquareCounts)
{
   const Mesh m1 = generate_unit_square(1);
   EXPECT_EQ(m1.num_cells(), 2u);
   EXPECT_EQ(m1.num_vertices(), 4u);
   EXPECT_EQ(m1.boundary_facets().size(), 4u);

   const Mesh m2 = generate_unit_square(2);
   EXPECT_EQ(m2.num_cells(), 8u);
   EXPECT_EQ(m2.num_vertices(), 9u);
   EXPECT_EQ(m2.boundary_facets().size(), 8u);

   const Mesh m4 = generate_unit_square(4);
   EXPECT_NEAR(m4.total_measure(), 1.0, 1e-14);
   EXPECT_NEAR(m4.h(), std::sqrt(2.0) / 4, 1e-15);
   EXPECT_EQ(m4.h(), max_h(m4));
   expect_outward_normals(m4);
   EXPECT_THROW(generate_unit_square(0), std::invalid_argument);
}

TEST(Mesh, LShape)
{
   const Mesh m1 = generate_lshape(1);
   EXPECT_NEAR(m1.total_measure(), 3.0, 1e-14);
   bool origin = false;
   for (const auto& v : m1.vertices())
      origin |= v[0] == 0.0 && v[1] == 0.0;
   EXPECT_TRUE(origin);
   EXPECT_THROW(generate_lshape(0), std::invalid_argument);

   // Six boundary segments of (-1,1)^2 \ [0,1)^2.
   const Mesh m2 = generate_lshape(2);
   auto on_boundary = [](const Point& p) {
      const double x = p[0], y = p[1], t = 1e-14;
      const bool in_x = x >= -1 - t && x <= 1 + t, in_y = y >= -1 - t && y <= 1 + t;
      return (std::abs(x + 1) < t && in_y) || (std::abs(y + 1) < t && in_x) ||
             (std::abs(x - 1) < t && y <= t && in_y) || (std::abs(y - 1) < t && x <= t && in_x) ||
             (std::abs(x) < t && y >= -t && in_y) || (std::abs(y) < t && x >= -t && in_x);
   };
   for (const auto& f : m2.boundary_facets()) {
      EXPECT_TRUE(on_boundary(m2.vertices()[f.vertices[0]]));
      EXPECT_TRUE(on_boundary(m2.vertices()[f.vertices[1]]));
      Point mid{};
      for (int a = 0; a < 2; ++a)
         mid[a] = 0.5 * (m2.vertices()[f.vertices[0]][a] + m2.vertices()[f.vertices[1]][a]);
      EXPECT_TRUE(on_boundary(mid));
   }
   expect_outward_normals(m2);
   EXPECT_NEAR(m2.largest_boundary_angle(), 1.5 * std::numbers::pi, 1e-12);
}

TEST(Mesh, Disk)
{
   EXPECT_NEAR(generate_disk(3).total_measure(), 3.0 * std::sqrt(3.0) / 4.0, 1e-12);
   const Mesh m64 = generate_disk(64);
   EXPECT_NEAR(m64.total_measure(), inscribed_polygon_area(64), 1e-12);
   EXPECT_LT(std::abs(m64.total_measure() - std::numbers::pi) / std::numbers::pi, 5e-3);
   for (int m : {3, 7, 16, 64}) {
      const Mesh d = generate_disk(m);
      EXPECT_EQ(d.boundary_facets().size(), static_cast<std::size_t>(m));
      for (int v : d.boundary_vertices())
         EXPECT_NEAR(std::hypot(d.vertices()[v][0], d.vertices()[v][1]), 1.0, 1e-14);
      expect_outward_normals(d);
   }
   EXPECT_THROW(generate_disk(2), std::invalid_argument);
}

TEST(Mesh, DiskShapeRegular)
{
   for (int m : {6, 16, 64, 280}) {
      const Mesh d = generate_disk(m);
      double     min_angle = 180.0;
      for (const auto& c : d.cells())
         for (int i = 0; i < 3; ++i) {
            const auto& a = d.vertices()[c[i]];
            const auto& b = d.vertices()[c[(i + 1) % 3]];
            const auto& e = d.vertices()[c[(i + 2) % 3]];
            const double ux = b[0] - a[0], uy = b[1] - a[1], vx = e[0] - a[0], vy = e[1] - a[1];
            const double ang = std::acos((ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy)));
            min_angle = std::min(min_angle, ang * 180.0 / std::numbers::pi);
         }
      EXPECT_GE(min_angle, 20.0) << "m = " << m;
   }
}

TEST(Mesh, Cube)
{
   const Mesh c1 = generate_unit_cube(1);
   EXPECT_EQ(c1.num_cells(), 6u);
   EXPECT_EQ(c1.num_vertices(), 8u);
   const Mesh c2 = generate_unit_cube(2);
   EXPECT_EQ(c2.num_cells(), 48u);
   EXPECT_NEAR(c2.total_measure(), 1.0, 1e-14);
   EXPECT_EQ(c2.boundary_facets().size(), 48u);
   EXPECT_NEAR(c2.boundary_measure(), 6.0, 1e-13);
   expect_outward_normals(c2);
   EXPECT_NEAR(c2.largest_boundary_angle(), 0.5 * std::numbers::pi, 1e-12);
   EXPECT_THROW(generate_unit_cube(0), std::invalid_argument);
}

TEST(Mesh, UniformRefine)
{
   const Mesh s = uniform_refine(generate_unit_square(1));
   EXPECT_EQ(s.num_cells(), 8u);

   for (const Mesh& m : {generate_unit_square(3), generate_lshape(2), generate_disk(16), generate_unit_cube(2)}) {
      const Mesh r = uniform_refine(m);
      EXPECT_EQ(r.num_cells(), m.num_cells() * (m.dim() == 2 ? 4u : 8u));
      EXPECT_NEAR(r.total_measure(), m.total_measure(), 1e-13);
      expect_outward_normals(r);
      const auto coarse = m.boundary_vertices();
      const auto fine = r.boundary_vertices();
      const std::set<int> fine_set(fine.begin(), fine.end());
      for (int v : coarse)   // coarse vertices keep their indices
         EXPECT_TRUE(fine_set.count(v));
      if (m.dim() == 2)
         EXPECT_NEAR(r.h(), 0.5 * m.h(), 1e-12);
   }
}

TEST(Mesh, RefinedDiskStaysOnPolygon)
{
   const Mesh d = generate_disk(16);
   const Mesh r = uniform_refine(d);
   EXPECT_NEAR(r.total_measure(), inscribed_polygon_area(16), 1e-13);
   int inside = 0;
   for (int v : r.boundary_vertices())
      inside += std::hypot(r.vertices()[v][0], r.vertices()[v][1]) < 1.0 - 1e-3;
   EXPECT_EQ(inside, 16);   // edge midpoints are not projected to the circle
}

TEST(Mesh, RoundTrip)
{
   for (const Mesh& m : {generate_unit_square(2), generate_disk(9), generate_unit_cube(2)}) {
      const Mesh r = read_mesh(write_mesh(m));
      EXPECT_EQ(r.cells(), m.cells());
      EXPECT_EQ(r.vertices(), m.vertices());
      EXPECT_EQ(r.repaired_cells(), 0);
   }
}

TEST(Mesh, ReadErrors)
{
   const std::string bad_index = "smesh 2 3 1\n0 0\n1 0\n0 1\n1 2 4\n";
   try {
      read_mesh(bad_index);
      FAIL();
   }
   catch (const MeshParseError& e) {
      EXPECT_EQ(e.line(), 5);
   }
   EXPECT_THROW(read_mesh("mesh 2 3 1\n"), MeshParseError);
   EXPECT_THROW(read_mesh("smesh 2 3 1\n0 0\n1 0\n"), MeshParseError);
   // Zero-area cell.
   try {
      read_mesh("smesh 2 3 1\n0 0\n1 0\n2 0\n1 2 3\n");
      FAIL();
   }
   catch (const MeshParseError& e) {
      EXPECT_EQ(e.line(), 5);
   }
}

TEST(Mesh, InvertedCellIsRepaired)
{
   const Mesh m = read_mesh("smesh 2 4 2\n0 0\n1 0\n1 1\n0 1\n1 3 2\n1 3 4\n");
   EXPECT_EQ(m.repaired_cells(), 1);
   EXPECT_NEAR(m.total_measure(), 1.0, 1e-15);
   for (std::size_t c = 0; c < m.num_cells(); ++c)
      EXPECT_GT(signed_measure(2, m.vertices(), m.cells()[c]), 0.0);
}
