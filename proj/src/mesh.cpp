#include "steklov/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

namespace steklov {

namespace {

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Point cross(const Point& a, const Point& b)
{
   return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

// Local facets of a simplex: facet f is opposite to local vertex f.
constexpr int kTriFacets[3][2] = {{1, 2}, {2, 0}, {0, 1}};
constexpr int kTetFacets[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

void orient(int dim, const std::vector<Point>& v, std::array<int, 4>& c)
{
   if (signed_measure(dim, v, c) < 0.0)
      std::swap(c[dim - 1], c[dim]);
}

// Shared face diagonal direction for structured quads: the split runs from
// the lower-left corner to the upper-right corner.
void split_quad(std::vector<std::array<int, 4>>& cells, int v00, int v10, int v01, int v11)
{
   cells.push_back({v00, v10, v11, -1});
   cells.push_back({v00, v11, v01, -1});
}

} // namespace

double signed_measure(int dim, const std::vector<Point>& v, const std::array<int, 4>& c)
{
   if (dim == 2) {
      const Point a = sub(v[c[1]], v[c[0]]);
      const Point b = sub(v[c[2]], v[c[0]]);
      return 0.5 * (a[0] * b[1] - a[1] * b[0]);
   }
   const Point a = sub(v[c[1]], v[c[0]]);
   const Point b = sub(v[c[2]], v[c[0]]);
   const Point d = sub(v[c[3]], v[c[0]]);
   return dot(cross(a, b), d) / 6.0;
}

Mesh::Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<int, 4>> cells)
  : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells))
{
   if (dim_ != 2 && dim_ != 3)
      throw std::invalid_argument("mesh dimension must be 2 or 3");
   if (cells_.empty())
      throw std::invalid_argument("mesh has no cells");

   const int nv = static_cast<int>(vertices_.size());
   diameters_.resize(cells_.size());
   measures_.resize(cells_.size());
   for (std::size_t c = 0; c < cells_.size(); ++c) {
      auto& cell = cells_[c];
      if (dim_ == 2)
         cell[3] = -1;
      for (int i = 0; i <= dim_; ++i)
         if (cell[i] < 0 || cell[i] >= nv)
            throw std::invalid_argument("cell " + std::to_string(c) + " references vertex out of range");

      double vol = signed_measure(dim_, vertices_, cell);
      double diam = 0.0;
      for (int i = 0; i <= dim_; ++i)
         for (int j = i + 1; j <= dim_; ++j)
            diam = std::max(diam, norm(sub(vertices_[cell[i]], vertices_[cell[j]])));
      // Relative degeneracy test against the scale of the cell.
      if (std::abs(vol) <= 1e-14 * std::pow(diam, dim_))
         throw std::invalid_argument("cell " + std::to_string(c) + " is degenerate");
      if (vol < 0.0) {
         std::swap(cell[dim_ - 1], cell[dim_]);
         vol = -vol;
         ++repaired_;
      }
      measures_[c] = vol;
      diameters_[c] = diam;
      h_ = std::max(h_, diam);
   }

   // Facet enumeration by sorted vertex keys.
   struct FacetRef
   {
      std::array<int, 3> key;
      int                cell;
      int                local;
   };
   std::vector<FacetRef> refs;
   refs.reserve(cells_.size() * (dim_ + 1));
   for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int f = 0; f <= dim_; ++f) {
         std::array<int, 3> key{-1, -1, -1};
         for (int i = 0; i < dim_; ++i)
            key[i] = cells_[c][dim_ == 2 ? kTriFacets[f][i] : kTetFacets[f][i]];
         std::sort(key.begin(), key.begin() + dim_);
         refs.push_back({key, static_cast<int>(c), f});
      }
   }
   std::sort(refs.begin(), refs.end(), [](const FacetRef& a, const FacetRef& b) {
      return std::tie(a.key, a.cell, a.local) < std::tie(b.key, b.cell, b.local);
   });

   for (std::size_t i = 0; i < refs.size();) {
      std::size_t j = i;
      while (j < refs.size() && refs[j].key == refs[i].key)
         ++j;
      if (j - i > 2)
         throw std::invalid_argument("non-manifold facet shared by more than two cells");
      if (j - i == 1) {
         const auto&   r = refs[i];
         const auto&   cell = cells_[r.cell];
         BoundaryFacet bf;
         bf.cell = r.cell;
         for (int k = 0; k < dim_; ++k)
            bf.vertices[k] = cell[dim_ == 2 ? kTriFacets[r.local][k] : kTetFacets[r.local][k]];
         if (dim_ == 2) {
            bf.vertices[2] = -1;
            const Point t = sub(vertices_[bf.vertices[1]], vertices_[bf.vertices[0]]);
            bf.measure = norm(t);
            bf.normal = {t[1] / bf.measure, -t[0] / bf.measure, 0.0};
         }
         else {
            const Point n = cross(sub(vertices_[bf.vertices[1]], vertices_[bf.vertices[0]]),
                                  sub(vertices_[bf.vertices[2]], vertices_[bf.vertices[0]]));
            const double len = norm(n);
            bf.measure = 0.5 * len;
            bf.normal = {n[0] / len, n[1] / len, n[2] / len};
         }
         Point fc{0, 0, 0};
         for (int k = 0; k < dim_; ++k)
            for (int a = 0; a < 3; ++a)
               fc[a] += vertices_[bf.vertices[k]][a] / dim_;
         if (dot(bf.normal, sub(fc, cell_centroid(r.cell))) < 0.0)
            for (auto& x : bf.normal)
               x = -x;
         boundary_facets_.push_back(bf);
      }
      i = j;
   }
}

double Mesh::total_measure() const
{
   double s = 0.0;
   for (double m : measures_)
      s += m;
   return s;
}

double Mesh::boundary_measure() const
{
   double s = 0.0;
   for (const auto& f : boundary_facets_)
      s += f.measure;
   return s;
}

Point Mesh::cell_centroid(std::size_t c) const
{
   Point p{0, 0, 0};
   for (int i = 0; i <= dim_; ++i)
      for (int a = 0; a < 3; ++a)
         p[a] += vertices_[cells_[c][i]][a] / (dim_ + 1);
   return p;
}

std::vector<int> Mesh::boundary_vertices() const
{
   std::vector<int> out;
   for (const auto& f : boundary_facets_)
      for (int k = 0; k < dim_; ++k)
         out.push_back(f.vertices[k]);
   std::sort(out.begin(), out.end());
   out.erase(std::unique(out.begin(), out.end()), out.end());
   return out;
}

double Mesh::largest_boundary_angle() const
{
   if (dim_ == 2) {
      // Interior angle at a boundary vertex is the sum of the cell angles there.
      std::vector<double> angle(vertices_.size(), 0.0);
      for (const auto& c : cells_) {
         for (int i = 0; i < 3; ++i) {
            const Point a = sub(vertices_[c[(i + 1) % 3]], vertices_[c[i]]);
            const Point b = sub(vertices_[c[(i + 2) % 3]], vertices_[c[i]]);
            angle[c[i]] += std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
         }
      }
      double best = 0.0;
      for (int v : boundary_vertices())
         if (std::abs(angle[v] - std::numbers::pi) > 1e-9)
            best = std::max(best, angle[v]);
      return best;
   }

   // 3D: dihedral angle sums along boundary edges.
   std::map<std::pair<int, int>, double> dihedral;
   for (const auto& c : cells_) {
      for (int i = 0; i < 4; ++i) {
         for (int j = i + 1; j < 4; ++j) {
            int k = 0;
            while (k == i || k == j)
               ++k;
            int l = 0;
            while (l == i || l == j || l == k)
               ++l;
            const Point e = sub(vertices_[c[j]], vertices_[c[i]]);
            const double ee = dot(e, e);
            auto perp = [&](int q) {
               Point w = sub(vertices_[c[q]], vertices_[c[i]]);
               const double s = dot(w, e) / ee;
               for (int a = 0; a < 3; ++a)
                  w[a] -= s * e[a];
               return w;
            };
            const Point u = perp(k);
            const Point w = perp(l);
            const double ang = std::acos(std::clamp(dot(u, w) / (norm(u) * norm(w)), -1.0, 1.0));
            dihedral[{std::min(c[i], c[j]), std::max(c[i], c[j])}] += ang;
         }
      }
   }
   double best = 0.0;
   for (const auto& [edge, sum] : dihedral)
      if (sum < 2.0 * std::numbers::pi - 1e-9 && std::abs(sum - std::numbers::pi) > 1e-9)
         best = std::max(best, sum);
   return best;
}

double inscribed_polygon_area(int m) { return 0.5 * m * std::sin(2.0 * std::numbers::pi / m); }

Mesh generate_unit_square(int n)
{
   if (n < 1)
      throw std::invalid_argument("generate_unit_square: n must be >= 1");
   std::vector<Point> v;
   v.reserve((n + 1) * (n + 1));
   for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
         v.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n, 0.0});
   std::vector<std::array<int, 4>> cells;
   cells.reserve(2 * n * n);
   auto id = [n](int i, int j) { return i + (n + 1) * j; };
   for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
         split_quad(cells, id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
   return Mesh(2, std::move(v), std::move(cells));
}

Mesh generate_lshape(int n)
{
   if (n < 1)
      throw std::invalid_argument("generate_lshape: n must be >= 1");
   const int          side = 2 * n;
   std::vector<int>   index((side + 1) * (side + 1), -1);
   std::vector<Point> v;
   auto inside_cell = [n](int i, int j) { return !(i >= n && j >= n); };
   auto gid = [side](int i, int j) { return i + (side + 1) * j; };
   for (int j = 0; j <= side; ++j) {
      for (int i = 0; i <= side; ++i) {
         bool used = false;
         for (int dj = -1; dj <= 0; ++dj)
            for (int di = -1; di <= 0; ++di) {
               const int ci = i + di, cj = j + dj;
               if (ci >= 0 && cj >= 0 && ci < side && cj < side && inside_cell(ci, cj))
                  used = true;
            }
         if (used) {
            index[gid(i, j)] = static_cast<int>(v.size());
            v.push_back({-1.0 + static_cast<double>(i) / n, -1.0 + static_cast<double>(j) / n, 0.0});
         }
      }
   }
   std::vector<std::array<int, 4>> cells;
   for (int j = 0; j < side; ++j)
      for (int i = 0; i < side; ++i)
         if (inside_cell(i, j))
            split_quad(cells, index[gid(i, j)], index[gid(i + 1, j)], index[gid(i, j + 1)],
                       index[gid(i + 1, j + 1)]);
   return Mesh(2, std::move(v), std::move(cells));
}

Mesh generate_disk(int m)
{
   if (m < 3)
      throw std::invalid_argument("generate_disk: m must be >= 3");
   const double pi = std::numbers::pi;
   const int    rings = (m + 5) / 6;

   std::vector<Point>            v{{0.0, 0.0, 0.0}};
   std::vector<std::vector<int>> ring_ids(rings + 1);
   std::vector<double>           ring_phase(rings + 1, 0.0);
   std::vector<int>              ring_count(rings + 1, 1);
   ring_ids[0] = {0};
   for (int j = 1; j <= rings; ++j) {
      const int count = (j == rings) ? m : std::max(3, static_cast<int>(std::lround(double(m) * j / rings)));
      const double r = (j == rings) ? 1.0 : double(j) / rings;
      const double phase = ((rings - j) % 2 == 1) ? pi / count : 0.0;
      ring_count[j] = count;
      ring_phase[j] = phase;
      for (int i = 0; i < count; ++i) {
         const double a = phase + 2.0 * pi * i / count;
         ring_ids[j].push_back(static_cast<int>(v.size()));
         if (j == rings)
            v.push_back({std::cos(a), std::sin(a), 0.0});
         else
            v.push_back({r * std::cos(a), r * std::sin(a), 0.0});
      }
   }

   std::vector<std::array<int, 4>> cells;
   for (int i = 0; i < ring_count[1]; ++i)
      cells.push_back({0, ring_ids[1][i], ring_ids[1][(i + 1) % ring_count[1]], -1});

   // Zip consecutive rings, always advancing along the ring whose next
   // point has the smaller polar angle.
   for (int j = 1; j < rings; ++j) {
      const int    ni = ring_count[j], no = ring_count[j + 1];
      const auto&  in = ring_ids[j];
      const auto&  out = ring_ids[j + 1];
      auto         ang_in = [&](int k) { return ring_phase[j] + 2.0 * pi * k / ni; };
      auto         ang_out = [&](int k) { return ring_phase[j + 1] + 2.0 * pi * k / no; };
      int          a = 0, b = 0;
      while (a < ni || b < no) {
         const bool advance_in = (b == no) || (a < ni && ang_in(a + 1) <= ang_out(b + 1));
         if (advance_in) {
            cells.push_back({in[a % ni], out[b % no], in[(a + 1) % ni], -1});
            ++a;
         }
         else {
            cells.push_back({in[a % ni], out[b % no], out[(b + 1) % no], -1});
            ++b;
         }
      }
   }
   for (auto& c : cells)
      orient(2, v, c);
   return Mesh(2, std::move(v), std::move(cells));
}

Mesh generate_unit_cube(int n)
{
   if (n < 1)
      throw std::invalid_argument("generate_unit_cube: n must be >= 1");
   std::vector<Point> v;
   v.reserve((n + 1) * (n + 1) * (n + 1));
   for (int k = 0; k <= n; ++k)
      for (int j = 0; j <= n; ++j)
         for (int i = 0; i <= n; ++i)
            v.push_back({double(i) / n, double(j) / n, double(k) / n});
   auto id = [n](int i, int j, int k) { return i + (n + 1) * (j + (n + 1) * k); };

   // Kuhn split: one tetrahedron per axis permutation, all sharing the main
   // diagonal of the subcube.
   constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
   std::vector<std::array<int, 4>> cells;
   cells.reserve(6 * n * n * n);
   for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
         for (int i = 0; i < n; ++i)
            for (const auto& p : perms) {
               std::array<int, 3> ijk{i, j, k};
               std::array<int, 4> c{};
               c[0] = id(ijk[0], ijk[1], ijk[2]);
               for (int s = 0; s < 3; ++s) {
                  ++ijk[p[s]];
                  c[s + 1] = id(ijk[0], ijk[1], ijk[2]);
               }
               orient(3, v, c);
               cells.push_back(c);
            }
   return Mesh(3, std::move(v), std::move(cells));
}

Mesh uniform_refine(const Mesh& mesh)
{
   const int                       dim = mesh.dim();
   std::vector<Point>              v = mesh.vertices();
   std::map<std::pair<int, int>, int> mid;
   auto midpoint = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto       it = mid.find(key);
      if (it != mid.end())
         return it->second;
      const Point& pa = v[a];
      const Point& pb = v[b];
      const int    id = static_cast<int>(v.size());
      v.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])});
      mid.emplace(key, id);
      return id;
   };

   std::vector<std::array<int, 4>> cells;
   cells.reserve(mesh.num_cells() * (dim == 2 ? 4 : 8));
   for (const auto& c : mesh.cells()) {
      if (dim == 2) {
         const int m01 = midpoint(c[0], c[1]);
         const int m12 = midpoint(c[1], c[2]);
         const int m02 = midpoint(c[0], c[2]);
         cells.push_back({c[0], m01, m02, -1});
         cells.push_back({m01, c[1], m12, -1});
         cells.push_back({m02, m12, c[2], -1});
         cells.push_back({m01, m12, m02, -1});
         continue;
      }
      int m[4][4];
      for (int i = 0; i < 4; ++i)
         for (int j = i + 1; j < 4; ++j)
            m[i][j] = m[j][i] = midpoint(c[i], c[j]);
      std::array<std::array<int, 4>, 8> kids{};
      kids[0] = {c[0], m[0][1], m[0][2], m[0][3]};
      kids[1] = {m[0][1], c[1], m[1][2], m[1][3]};
      kids[2] = {m[0][2], m[1][2], c[2], m[2][3]};
      kids[3] = {m[0][3], m[1][3], m[2][3], c[3]};

      // Inner octahedron: split along its shortest diagonal (first on ties).
      const std::array<std::pair<int, int>, 3> diagonals{
        {{m[0][1], m[2][3]}, {m[0][2], m[1][3]}, {m[0][3], m[1][2]}}};
      int    best = 0;
      double best_len = 1e300;
      for (int d = 0; d < 3; ++d) {
         const double len = norm(sub(v[diagonals[d].first], v[diagonals[d].second]));
         if (len < best_len * (1.0 - 1e-12)) {
            best_len = len;
            best = d;
         }
      }
      const auto [a, b] = diagonals[best];
      const auto& p = diagonals[(best + 1) % 3];
      const auto& q = diagonals[(best + 2) % 3];
      const int   ring[4] = {p.first, q.first, p.second, q.second};
      for (int s = 0; s < 4; ++s)
         kids[4 + s] = {a, b, ring[s], ring[(s + 1) % 4]};
      for (auto& k : kids) {
         orient(3, v, k);
         cells.push_back(k);
      }
   }
   return Mesh(dim, std::move(v), std::move(cells));
}

MeshParseError::MeshParseError(int line, const std::string& what)
  : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

std::string write_mesh(const Mesh& mesh)
{
   std::ostringstream os;
   os << std::setprecision(17);
   os << "smesh " << mesh.dim() << ' ' << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
   for (const auto& p : mesh.vertices()) {
      for (int a = 0; a < mesh.dim(); ++a)
         os << (a ? " " : "") << p[a];
      os << '\n';
   }
   for (const auto& c : mesh.cells()) {
      for (int i = 0; i <= mesh.dim(); ++i)
         os << (i ? " " : "") << c[i] + 1;
      os << '\n';
   }
   return os.str();
}

Mesh read_mesh(std::string_view text)
{
   std::vector<std::string> lines;
   {
      std::string       buf{text};
      std::istringstream is(buf);
      std::string       line;
      while (std::getline(is, line))
         lines.push_back(line);
   }
   int line_no = 0;
   auto next = [&]() -> std::istringstream {
      // Skip blank lines but keep numbering faithful to the source.
      while (line_no < static_cast<int>(lines.size())) {
         const std::string& l = lines[line_no++];
         if (l.find_first_not_of(" \t\r") != std::string::npos)
            return std::istringstream(l);
      }
      throw MeshParseError(line_no + 1, "unexpected end of file");
   };

   auto        header = next();
   std::string tag;
   long long   dim = 0, nv = 0, nc = 0;
   if (!(header >> tag >> dim >> nv >> nc) || tag != "smesh" || (dim != 2 && dim != 3) || nv <= 0 || nc <= 0)
      throw MeshParseError(line_no, "malformed header, expected 'smesh <dim> <nv> <nc>'");
   std::string extra;
   if (header >> extra)
      throw MeshParseError(line_no, "trailing tokens in header");

   std::vector<Point> v(nv, Point{0, 0, 0});
   for (long long i = 0; i < nv; ++i) {
      auto is = next();
      for (int a = 0; a < dim; ++a)
         if (!(is >> v[i][a]))
            throw MeshParseError(line_no, "expected " + std::to_string(dim) + " coordinates");
      if (is >> extra)
         throw MeshParseError(line_no, "trailing tokens after coordinates");
   }

   std::vector<std::array<int, 4>> cells(nc, {-1, -1, -1, -1});
   for (long long c = 0; c < nc; ++c) {
      auto is = next();
      for (int i = 0; i <= dim; ++i) {
         long long idx = 0;
         if (!(is >> idx))
            throw MeshParseError(line_no, "expected " + std::to_string(dim + 1) + " vertex indices");
         if (idx < 1 || idx > nv)
            throw MeshParseError(line_no, "vertex index " + std::to_string(idx) + " out of range");
         cells[c][i] = static_cast<int>(idx - 1);
      }
      if (is >> extra)
         throw MeshParseError(line_no, "trailing tokens after cell");
      const double vol = signed_measure(static_cast<int>(dim), v, cells[c]);
      if (vol == 0.0)
         throw MeshParseError(line_no, "cell has zero volume");
   }
   try {
      return Mesh(static_cast<int>(dim), std::move(v), std::move(cells));
   }
   catch (const std::invalid_argument& e) {
      throw MeshParseError(line_no, e.what());
   }
}

} // namespace steklov
