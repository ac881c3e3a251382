#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace steklov {

using Point = std::array<double, 3>;

/// Boundary facet (edge in 2D, triangle in 3D) together with its owning cell.
struct BoundaryFacet
{
   std::array<int, 3> vertices{};   // first `dim` entries are used
   int                cell = -1;
   Point              normal{};     // unit outward normal
   double             measure = 0.0;
};

/// Simplicial mesh of a polygon or polyhedron.
///
/// Cells are stored positively oriented. Boundary facets are derived from the
/// connectivity (facets owned by exactly one cell) and never stored on disk.
class Mesh
{
 public:
   /// Builds a mesh from raw connectivity. Negatively oriented cells are
   /// repaired by a vertex swap and counted in `repaired_cells()`; degenerate
   /// cells and non-manifold facets throw std::invalid_argument.
   Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<int, 4>> cells);

   int dim() const { return dim_; }
   std::size_t num_vertices() const { return vertices_.size(); }
   std::size_t num_cells() const { return cells_.size(); }

   const std::vector<Point>& vertices() const { return vertices_; }
   const std::vector<std::array<int, 4>>& cells() const { return cells_; }
   const std::vector<BoundaryFacet>& boundary_facets() const { return boundary_facets_; }

   /// Max cell diameter.
   double h() const { return h_; }
   double cell_diameter(std::size_t c) const { return diameters_[c]; }
   double cell_measure(std::size_t c) const { return measures_[c]; }
   double total_measure() const;
   double boundary_measure() const;

   Point cell_centroid(std::size_t c) const;

   /// Sorted list of vertex indices touching the boundary.
   std::vector<int> boundary_vertices() const;

   /// Number of cells whose orientation was flipped during construction.
   int repaired_cells() const { return repaired_; }

   /// Largest interior corner angle in radians: vertex angles in 2D, dihedral
   /// angles along boundary edges in 3D. Straight angles (pi) are not corners.
   double largest_boundary_angle() const;

 private:
   int                             dim_;
   std::vector<Point>              vertices_;
   std::vector<std::array<int, 4>> cells_;
   std::vector<BoundaryFacet>      boundary_facets_;
   std::vector<double>             diameters_;
   std::vector<double>             measures_;
   double                          h_ = 0.0;
   int                             repaired_ = 0;
};

/// Signed measure of a simplex (area in 2D, volume in 3D).
double signed_measure(int dim, const std::vector<Point>& vertices, const std::array<int, 4>& cell);

Mesh generate_unit_square(int n);
Mesh generate_lshape(int n);
Mesh generate_disk(int m);
Mesh generate_unit_cube(int n);

/// Red refinement: 4 children per triangle, 8 per tetrahedron.
Mesh uniform_refine(const Mesh& mesh);

/// Area of the regular m-gon inscribed in the unit circle.
double inscribed_polygon_area(int m);

class MeshParseError : public std::runtime_error
{
 public:
   MeshParseError(int line, const std::string& what);
   int line() const { return line_; }

 private:
   int line_;
};

std::string write_mesh(const Mesh& mesh);
Mesh read_mesh(std::string_view text);

} // namespace steklov
