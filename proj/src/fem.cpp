#include "steklov/fem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

namespace steklov {

namespace {

constexpr int kTriEdges[3][2] = {{0, 1}, {1, 2}, {0, 2}};
constexpr int kTetEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

int num_local_edges(int dim) { return dim == 1 ? 1 : (dim == 2 ? 3 : 6); }

const int* local_edge(int dim, int e)
{
   static constexpr int kSegEdge[1][2] = {{0, 1}};
   if (dim == 1)
      return kSegEdge[e];
   return dim == 2 ? kTriEdges[e] : kTetEdges[e];
}

/// Lagrange basis values on a simplex of dimension `dim` at barycentric
/// point `lam`, ordered vertices then edges.
void basis_values(int dim, int degree, const std::array<double, 4>& lam, std::vector<double>& phi)
{
   phi.clear();
   if (degree == 1) {
      for (int i = 0; i <= dim; ++i)
         phi.push_back(lam[i]);
      return;
   }
   for (int i = 0; i <= dim; ++i)
      phi.push_back(lam[i] * (2.0 * lam[i] - 1.0));
   for (int e = 0; e < num_local_edges(dim); ++e) {
      const int* ed = local_edge(dim, e);
      phi.push_back(4.0 * lam[ed[0]] * lam[ed[1]]);
   }
}

using Grad = std::array<double, 3>;

void basis_gradients(int dim, int degree, const std::array<double, 4>& lam, const std::array<Grad, 4>& glam,
                     std::vector<Grad>& grad)
{
   grad.clear();
   if (degree == 1) {
      for (int i = 0; i <= dim; ++i)
         grad.push_back(glam[i]);
      return;
   }
   for (int i = 0; i <= dim; ++i) {
      const double s = 4.0 * lam[i] - 1.0;
      grad.push_back({s * glam[i][0], s * glam[i][1], s * glam[i][2]});
   }
   for (int e = 0; e < num_local_edges(dim); ++e) {
      const int* ed = local_edge(dim, e);
      const int  a = ed[0], b = ed[1];
      Grad       g{};
      for (int k = 0; k < 3; ++k)
         g[k] = 4.0 * (lam[b] * glam[a][k] + lam[a] * glam[b][k]);
      grad.push_back(g);
   }
}

/// Gradients of the barycentric coordinates of cell c.
std::array<Grad, 4> barycentric_gradients(const Mesh& mesh, std::size_t c)
{
   const int   dim = mesh.dim();
   const auto& v = mesh.vertices();
   const auto& cell = mesh.cells()[c];
   std::array<Grad, 4> g{};
   if (dim == 2) {
      const double a = v[cell[1]][0] - v[cell[0]][0], b = v[cell[2]][0] - v[cell[0]][0];
      const double cc = v[cell[1]][1] - v[cell[0]][1], d = v[cell[2]][1] - v[cell[0]][1];
      const double det = a * d - b * cc;
      // Rows of J^{-1} with J = [[a, b], [cc, d]].
      g[1] = {d / det, -b / det, 0.0};
      g[2] = {-cc / det, a / det, 0.0};
   }
   else {
      double j[3][3];
      for (int r = 0; r < 3; ++r)
         for (int k = 0; k < 3; ++k)
            j[r][k] = v[cell[k + 1]][r] - v[cell[0]][r];
      const double det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
                         j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                         j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
      double inv[3][3];
      inv[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det;
      inv[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det;
      inv[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det;
      inv[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det;
      inv[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det;
      inv[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det;
      inv[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det;
      inv[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det;
      inv[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det;
      for (int r = 0; r < 3; ++r)
         g[r + 1] = {inv[r][0], inv[r][1], inv[r][2]};
   }
   for (int k = 0; k < 3; ++k)
      g[0][k] = -(g[1][k] + g[2][k] + (dim == 3 ? g[3][k] : 0.0));
   return g;
}

double gdot(const Grad& a, const Grad& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

enum class CellForm
{
   stiffness,
   strain,
   h1
};

CsrMatrix assemble_cell_form(const FunctionSpace& space, CellForm form, double lambda, double mu, int order)
{
   const Mesh&          mesh = space.mesh();
   const int            dim = mesh.dim();
   const int            npc = space.nodes_per_cell();
   const QuadratureRule rule = simplex_rule(dim, order);
   const double         ref = reference_simplex_measure(dim);

   SymmetricBuilder builder(space.n_dofs());
   builder.reserve(mesh.num_cells() * static_cast<std::size_t>(npc * dim) * (npc * dim + 1) / 2);

   const int           nloc = npc * dim;
   std::vector<double> ke(static_cast<std::size_t>(nloc) * nloc);
   std::vector<double> phi;
   std::vector<Grad>   grad;
   std::vector<int>    gdofs(nloc);

   for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
      std::fill(ke.begin(), ke.end(), 0.0);
      const auto   glam = barycentric_gradients(mesh, c);
      const double scale = mesh.cell_measure(c) / ref;
      for (std::size_t q = 0; q < rule.size(); ++q) {
         const double w = rule.weights[q] * scale;
         basis_gradients(dim, space.degree(), rule.points[q], glam, grad);
         if (form == CellForm::h1)
            basis_values(dim, space.degree(), rule.points[q], phi);
         for (int a = 0; a < npc; ++a)
            for (int i = 0; i < dim; ++i)
               for (int b = 0; b < npc; ++b)
                  for (int j = 0; j < dim; ++j) {
                     double val = 0.0;
                     const double gg = (i == j) ? gdot(grad[a], grad[b]) : 0.0;
                     switch (form) {
                     case CellForm::stiffness:
                        val = mu * (gg + grad[a][j] * grad[b][i]) + lambda * grad[a][i] * grad[b][j];
                        break;
                     case CellForm::strain:
                        val = 0.5 * (gg + grad[a][j] * grad[b][i]);
                        break;
                     case CellForm::h1:
                        val = (i == j) ? phi[a] * phi[b] + gg : 0.0;
                        break;
                     }
                     ke[static_cast<std::size_t>(a * dim + i) * nloc + (b * dim + j)] += w * val;
                  }
      }
      const auto nodes = space.cell_nodes(c);
      for (int a = 0; a < npc; ++a)
         for (int i = 0; i < dim; ++i)
            gdofs[a * dim + i] = space.dof(nodes[a], i);
      for (int r = 0; r < nloc; ++r)
         for (int s = 0; s < nloc; ++s)
            builder.add(gdofs[r], gdofs[s], ke[static_cast<std::size_t>(r) * nloc + s]);
   }
   return builder.finalize();
}

} // namespace

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, int degree)
  : mesh_(std::move(mesh)), degree_(degree)
{
   if (!mesh_)
      throw std::invalid_argument("FunctionSpace: null mesh");
   if (degree_ != 1 && degree_ != 2)
      throw std::invalid_argument("FunctionSpace: degree must be 1 or 2");
   const int dim = mesh_->dim();
   nodes_ = mesh_->vertices();

   std::map<std::pair<int, int>, int> edge_id;
   auto edge_node = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto       it = edge_id.find(key);
      if (it != edge_id.end())
         return it->second;
      const int   id = static_cast<int>(nodes_.size());
      const auto& pa = mesh_->vertices()[a];
      const auto& pb = mesh_->vertices()[b];
      nodes_.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])});
      edge_id.emplace(key, id);
      return id;
   };

   nodes_per_cell_ = (degree_ == 1) ? dim + 1 : (dim + 1) * (dim + 2) / 2;
   nodes_per_facet_ = (degree_ == 1) ? dim : dim * (dim + 1) / 2;
   cell_nodes_.reserve(mesh_->num_cells() * nodes_per_cell_);
   for (const auto& cell : mesh_->cells()) {
      for (int i = 0; i <= dim; ++i)
         cell_nodes_.push_back(cell[i]);
      if (degree_ == 2)
         for (int e = 0; e < num_local_edges(dim); ++e) {
            const int* ed = local_edge(dim, e);
            cell_nodes_.push_back(edge_node(cell[ed[0]], cell[ed[1]]));
         }
   }

   const int        fdim = dim - 1;
   std::vector<char> on_boundary(nodes_.size(), 0);
   for (const auto& f : mesh_->boundary_facets()) {
      for (int i = 0; i < dim; ++i)
         facet_nodes_.push_back(f.vertices[i]);
      if (degree_ == 2)
         for (int e = 0; e < num_local_edges(fdim); ++e) {
            const int* ed = local_edge(fdim, e);
            facet_nodes_.push_back(edge_node(f.vertices[ed[0]], f.vertices[ed[1]]));
         }
   }
   for (int n : facet_nodes_)
      on_boundary[n] = 1;
   for (int comp = 0; comp < dim; ++comp)
      for (std::size_t n = 0; n < nodes_.size(); ++n)
         if (on_boundary[n])
            boundary_dofs_.push_back(dof(static_cast<int>(n), comp));
}

FunctionSpace build_space(const Mesh& mesh, int degree)
{
   return FunctionSpace(std::make_shared<const Mesh>(mesh), degree);
}

FunctionSpace build_space(std::shared_ptr<const Mesh> mesh, int degree)
{
   return FunctionSpace(std::move(mesh), degree);
}

ElasticMaterial::ElasticMaterial(double lambda_, double mu_, int dim) : lambda(lambda_), mu(mu_)
{
   if (!(mu > 0.0))
      throw std::invalid_argument("ElasticMaterial: mu must be positive");
   if (!(lambda + (2.0 / dim) * mu > 0.0))
      throw std::invalid_argument("ElasticMaterial: lambda + (2/d) mu must be positive");
}

double smallest_eigenvalue(int dim, const BoundaryWeight::Matrix3& m)
{
   Eigen::MatrixXd a(dim, dim);
   for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
         a(i, j) = m[i][j];
   Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
   return es.eigenvalues()(0);
}

namespace {

void validate_matrix(int dim, const BoundaryWeight::Matrix3& m, double lower_bound)
{
   for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
         if (std::abs(m[i][j] - m[j][i]) > 1e-14)
            throw std::invalid_argument("BoundaryWeight: matrix weight is not symmetric");
   if (smallest_eigenvalue(dim, m) < lower_bound)
      throw std::invalid_argument("BoundaryWeight: matrix weight violates its lower bound");
}

} // namespace

BoundaryWeight BoundaryWeight::scalar(double p)
{
   return scalar_per_facet({p}, p);
}

BoundaryWeight BoundaryWeight::scalar_per_facet(std::vector<double> p, double lower_bound)
{
   if (!(lower_bound > 0.0))
      throw std::invalid_argument("BoundaryWeight: lower bound p0 must be positive");
   if (p.empty())
      throw std::invalid_argument("BoundaryWeight: no values");
   for (double x : p)
      if (!(x >= lower_bound))
         throw std::invalid_argument("BoundaryWeight: p below its lower bound p0");
   BoundaryWeight w;
   w.kind_ = Kind::scalar;
   w.lower_bound_ = lower_bound;
   w.p_ = std::move(p);
   return w;
}

BoundaryWeight BoundaryWeight::matrix(int dim, const Matrix3& m)
{
   return matrix_per_facet(dim, {m}, smallest_eigenvalue(dim, m));
}

BoundaryWeight BoundaryWeight::matrix_per_facet(int dim, std::vector<Matrix3> m, double lower_bound)
{
   if (dim != 2 && dim != 3)
      throw std::invalid_argument("BoundaryWeight: dimension must be 2 or 3");
   if (!(lower_bound > 0.0))
      throw std::invalid_argument("BoundaryWeight: lower bound m must be positive");
   if (m.empty())
      throw std::invalid_argument("BoundaryWeight: no values");
   for (const auto& x : m)
      validate_matrix(dim, x, lower_bound);
   BoundaryWeight w;
   w.kind_ = Kind::matrix;
   w.dim_ = dim;
   w.lower_bound_ = lower_bound;
   w.m_ = std::move(m);
   return w;
}

double BoundaryWeight::sup_norm() const
{
   double best = 0.0;
   if (kind_ == Kind::scalar) {
      for (double x : p_)
         best = std::max(best, std::abs(x));
      return best;
   }
   for (const auto& m : m_) {
      Matrix3 neg{};
      for (int i = 0; i < dim_; ++i)
         for (int j = 0; j < dim_; ++j)
            neg[i][j] = -m[i][j];
      best = std::max(best, -smallest_eigenvalue(dim_, neg));
   }
   return best;
}

double BoundaryWeight::scalar_at(std::size_t facet) const { return p_.size() == 1 ? p_[0] : p_.at(facet); }

const BoundaryWeight::Matrix3& BoundaryWeight::matrix_at(std::size_t facet) const
{
   return m_.size() == 1 ? m_[0] : m_.at(facet);
}

bool BoundaryWeight::per_facet() const { return kind_ == Kind::scalar ? p_.size() > 1 : m_.size() > 1; }

std::size_t BoundaryWeight::facet_count() const { return kind_ == Kind::scalar ? p_.size() : m_.size(); }

BoundaryWeight BoundaryWeight::scaled(double c) const
{
   if (!(c > 0.0))
      throw std::invalid_argument("BoundaryWeight::scaled: factor must be positive");
   BoundaryWeight w = *this;
   w.lower_bound_ *= c;
   for (auto& x : w.p_)
      x *= c;
   for (auto& m : w.m_)
      for (auto& row : m)
         for (auto& x : row)
            x *= c;
   return w;
}

CsrMatrix assemble_stiffness(const FunctionSpace& space, const ElasticMaterial& mat, const AssemblyOptions& opts)
{
   const int order = opts.cell_order.value_or(2 * (space.degree() - 1));
   return assemble_cell_form(space, CellForm::stiffness, mat.lambda, mat.mu, order);
}

CsrMatrix assemble_strain_gram(const FunctionSpace& space, const AssemblyOptions& opts)
{
   const int order = opts.cell_order.value_or(2 * (space.degree() - 1));
   return assemble_cell_form(space, CellForm::strain, 0.0, 0.5, order);
}

CsrMatrix assemble_h1_gram(const FunctionSpace& space, const AssemblyOptions& opts)
{
   const int order = opts.cell_order.value_or(2 * space.degree());
   return assemble_cell_form(space, CellForm::h1, 0.0, 0.0, order);
}

CsrMatrix assemble_boundary_mass(const FunctionSpace& space, const BoundaryWeight& weight,
                                 const AssemblyOptions& opts)
{
   const Mesh& mesh = space.mesh();
   const int   dim = mesh.dim();
   const int   fdim = dim - 1;
   const auto& facets = mesh.boundary_facets();
   if (weight.per_facet() && weight.facet_count() != facets.size())
      throw std::invalid_argument("assemble_boundary_mass: per-facet weight count does not match the mesh");
   if (weight.kind() == BoundaryWeight::Kind::matrix && smallest_eigenvalue(dim, weight.matrix_at(0)) <= 0.0)
      throw std::invalid_argument("assemble_boundary_mass: matrix weight not positive definite");

   const QuadratureRule rule = simplex_rule(fdim, opts.facet_order.value_or(2 * space.degree()));
   const double         ref = reference_simplex_measure(fdim);
   const int            npf = space.nodes_per_facet();

   SymmetricBuilder builder(space.n_dofs());
   std::vector<double> mass(static_cast<std::size_t>(npf) * npf);
   std::vector<double> phi;
   for (std::size_t f = 0; f < facets.size(); ++f) {
      std::fill(mass.begin(), mass.end(), 0.0);
      const double scale = facets[f].measure / ref;
      for (std::size_t q = 0; q < rule.size(); ++q) {
         basis_values(fdim, space.degree(), rule.points[q], phi);
         const double w = rule.weights[q] * scale;
         for (int a = 0; a < npf; ++a)
            for (int b = 0; b < npf; ++b)
               mass[a * npf + b] += w * phi[a] * phi[b];
      }
      const auto nodes = space.facet_nodes(f);
      for (int a = 0; a < npf; ++a)
         for (int b = 0; b < npf; ++b) {
            const double m = mass[a * npf + b];
            if (weight.kind() == BoundaryWeight::Kind::scalar) {
               const double p = weight.scalar_at(f);
               for (int i = 0; i < dim; ++i)
                  builder.add(space.dof(nodes[a], i), space.dof(nodes[b], i), p * m);
            }
            else {
               const auto& M = weight.matrix_at(f);
               for (int i = 0; i < dim; ++i)
                  for (int j = 0; j < dim; ++j)
                     builder.add(space.dof(nodes[a], i), space.dof(nodes[b], j), M[i][j] * m);
            }
         }
   }
   return builder.finalize();
}

std::vector<std::vector<double>> rigid_motion_basis(const FunctionSpace& space)
{
   return rigid_motion_basis(space, assemble_h1_gram(space));
}

std::vector<std::vector<double>> rigid_motion_basis(const FunctionSpace& space, const CsrMatrix& gram)
{
   const int                        dim = space.components();
   std::vector<std::vector<double>> basis;
   for (int c = 0; c < dim; ++c)
      basis.push_back(space.interpolate([c](const Point&) {
         Point e{0, 0, 0};
         e[c] = 1.0;
         return e;
      }));
   const std::vector<std::pair<int, int>> planes =
     dim == 2 ? std::vector<std::pair<int, int>>{{0, 1}} : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}};
   for (const auto& [i, j] : planes)
      basis.push_back(space.interpolate([i = i, j = j](const Point& x) {
         Point u{0, 0, 0};
         u[i] = -x[j];
         u[j] = x[i];
         return u;
      }));

   // Modified Gram-Schmidt in the Gram inner product, two passes.
   for (std::size_t k = 0; k < basis.size(); ++k) {
      for (int pass = 0; pass < 2; ++pass)
         for (std::size_t l = 0; l < k; ++l) {
            const double proj = gram.bilinear(basis[l], basis[k]);
            for (std::size_t t = 0; t < basis[k].size(); ++t)
               basis[k][t] -= proj * basis[l][t];
         }
      const double nrm = std::sqrt(gram.quadratic(basis[k]));
      for (auto& x : basis[k])
         x /= nrm;
   }
   return basis;
}

} // namespace steklov
