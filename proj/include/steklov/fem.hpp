#pragma once

#include "steklov/mesh.hpp"
#include "steklov/quadrature.hpp"
#include "steklov/sparse.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace steklov {

/// Vector-valued continuous Lagrange space of degree 1 or 2.
///
/// Scalar nodes are the mesh vertices followed (for degree 2) by the edge
/// midpoints in order of first appearance. Global DOFs are component-major:
/// dof(node, comp) = comp * num_nodes + node.
class FunctionSpace
{
 public:
   FunctionSpace(std::shared_ptr<const Mesh> mesh, int degree);

   const Mesh& mesh() const { return *mesh_; }
   std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
   int degree() const { return degree_; }
   int components() const { return mesh_->dim(); }

   std::size_t num_nodes() const { return nodes_.size(); }
   std::size_t n_dofs() const { return nodes_.size() * mesh_->dim(); }
   int dof(int node, int comp) const { return comp * static_cast<int>(nodes_.size()) + node; }

   const std::vector<Point>& nodes() const { return nodes_; }
   int nodes_per_cell() const { return nodes_per_cell_; }
   /// Scalar node indices of cell c, local ordering: vertices then edges.
   std::span<const int> cell_nodes(std::size_t c) const
   {
      return {cell_nodes_.data() + c * nodes_per_cell_, static_cast<std::size_t>(nodes_per_cell_)};
   }
   int nodes_per_facet() const { return nodes_per_facet_; }
   /// Scalar node indices on boundary facet f (vertices then edges).
   std::span<const int> facet_nodes(std::size_t f) const
   {
      return {facet_nodes_.data() + f * nodes_per_facet_, static_cast<std::size_t>(nodes_per_facet_)};
   }

   /// Sorted global DOFs whose node lies on the boundary.
   const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }

   /// Nodal interpolation of a vector field.
   template <class F>
   std::vector<double> interpolate(F&& field) const
   {
      std::vector<double> u(n_dofs(), 0.0);
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
         const auto val = field(nodes_[i]);
         for (int c = 0; c < components(); ++c)
            u[dof(static_cast<int>(i), c)] = val[c];
      }
      return u;
   }

 private:
   std::shared_ptr<const Mesh> mesh_;
   int                         degree_;
   std::vector<Point>          nodes_;
   int                         nodes_per_cell_ = 0;
   int                         nodes_per_facet_ = 0;
   std::vector<int>            cell_nodes_;
   std::vector<int>            facet_nodes_;
   std::vector<int>            boundary_dofs_;
};

FunctionSpace build_space(const Mesh& mesh, int degree);
FunctionSpace build_space(std::shared_ptr<const Mesh> mesh, int degree);

/// Isotropic Lame parameters. Requires mu > 0 and lambda + (2/d) mu > 0.
struct ElasticMaterial
{
   double lambda = 1.0;
   double mu = 1.0;

   ElasticMaterial(double lambda, double mu, int dim = 2);
};

/// Boundary weight of the Robin/Steklov term: either a positive scalar p or a
/// symmetric positive definite d x d matrix M, piecewise constant per facet.
class BoundaryWeight
{
 public:
   using Matrix3 = std::array<std::array<double, 3>, 3>;
   enum class Kind
   {
      scalar,
      matrix
   };

   /// p constant on the whole boundary.
   static BoundaryWeight scalar(double p);
   /// One value per boundary facet, each >= lower_bound > 0.
   static BoundaryWeight scalar_per_facet(std::vector<double> p, double lower_bound);
   /// M constant on the whole boundary (upper-left d x d block used).
   static BoundaryWeight matrix(int dim, const Matrix3& m);
   /// One matrix per facet; smallest eigenvalue of each >= lower_bound > 0.
   static BoundaryWeight matrix_per_facet(int dim, std::vector<Matrix3> m, double lower_bound);

   Kind kind() const { return kind_; }
   double lower_bound() const { return lower_bound_; }
   /// Sup norm over facets (largest |p| or spectral norm of M).
   double sup_norm() const;

   double scalar_at(std::size_t facet) const;
   const Matrix3& matrix_at(std::size_t facet) const;
   bool per_facet() const;
   std::size_t facet_count() const;

   /// Same weight with every value multiplied by c > 0.
   BoundaryWeight scaled(double c) const;

 private:
   Kind                 kind_ = Kind::scalar;
   int                  dim_ = 0;
   double               lower_bound_ = 1.0;
   std::vector<double>  p_;
   std::vector<Matrix3> m_;
};

/// Smallest eigenvalue of the symmetric leading d x d block.
double smallest_eigenvalue(int dim, const BoundaryWeight::Matrix3& m);

/// Quadrature orders used by assembly. Defaults are exact for the integrands.
struct AssemblyOptions
{
   std::optional<int> cell_order;
   std::optional<int> facet_order;
};

/// (sigma(u), eps(v)) = 2 mu (eps(u), eps(v)) + lambda (div u, div v).
CsrMatrix assemble_stiffness(const FunctionSpace& space, const ElasticMaterial& mat,
                             const AssemblyOptions& opts = {});

/// (p u, v) on the boundary, or (M u, v) for the matrix weight.
CsrMatrix assemble_boundary_mass(const FunctionSpace& space, const BoundaryWeight& w,
                                 const AssemblyOptions& opts = {});

/// (u, v) + (grad u, grad v) over the domain.
CsrMatrix assemble_h1_gram(const FunctionSpace& space, const AssemblyOptions& opts = {});

/// (eps(u), eps(v)) over the domain.
CsrMatrix assemble_strain_gram(const FunctionSpace& space, const AssemblyOptions& opts = {});

/// d(d+1)/2 rigid motions (translations, then rotations), interpolated and
/// orthonormalized in the H1 Gram inner product.
std::vector<std::vector<double>> rigid_motion_basis(const FunctionSpace& space);

/// Same, orthonormalized with respect to a caller-supplied Gram matrix.
std::vector<std::vector<double>> rigid_motion_basis(const FunctionSpace& space, const CsrMatrix& gram);

} // namespace steklov
