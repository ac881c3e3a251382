#pragma once

#include <array>
#include <vector>

namespace steklov {

/// Quadrature on the reference simplex of dimension 1, 2 or 3.
///
/// Points are barycentric (dim+1 coordinates, the rest zero); weights sum to
/// the measure of the reference simplex (1, 1/2, 1/6).
struct QuadratureRule
{
   int                                dim = 0;
   int                                order = 0;   // exact for total degree <= order
   std::vector<std::array<double, 4>> points;
   std::vector<double>                weights;

   std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Collapsed-coordinate (Duffy) product rule exact for polynomials of total
/// degree `order`.
QuadratureRule simplex_rule(int dim, int order);

double reference_simplex_measure(int dim);

} // namespace steklov
