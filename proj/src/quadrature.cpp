#include "steklov/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace steklov {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights)
{
   if (n < 1)
      throw std::invalid_argument("gauss_legendre: n must be >= 1");
   nodes.assign(n, 0.0);
   weights.assign(n, 0.0);
   auto legendre = [n](double x, double& pn, double& dpn) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
         const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
         p0 = p1;
         p1 = p2;
      }
      pn = p1;
      dpn = n * (x * p1 - p0) / (x * x - 1.0);
   };
   for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double pn = 0.0, dpn = 1.0;
      for (int it = 0; it < 100; ++it) {
         legendre(x, pn, dpn);
         const double dx = pn / dpn;
         x -= dx;
         if (std::abs(dx) < 1e-16)
            break;
      }
      legendre(x, pn, dpn);
      const double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
      // Map [-1,1] -> [0,1]; x is the positive member of the symmetric pair.
      nodes[i] = 0.5 * (1.0 - x);
      nodes[n - 1 - i] = 0.5 * (1.0 + x);
      weights[i] = weights[n - 1 - i] = 0.5 * w;
   }
   if (n % 2 == 1)
      nodes[n / 2] = 0.5;
}

double reference_simplex_measure(int dim)
{
   switch (dim) {
   case 1: return 1.0;
   case 2: return 0.5;
   case 3: return 1.0 / 6.0;
   default: throw std::invalid_argument("reference_simplex_measure: dim must be 1, 2 or 3");
   }
}

QuadratureRule simplex_rule(int dim, int order)
{
   if (order < 0)
      throw std::invalid_argument("simplex_rule: negative order");
   QuadratureRule rule;
   rule.dim = dim;
   rule.order = order;
   std::vector<double> x, w;
   switch (dim) {
   case 1: {
      gauss_legendre(order / 2 + 1, x, w);
      for (std::size_t i = 0; i < x.size(); ++i) {
         rule.points.push_back({1.0 - x[i], x[i], 0.0, 0.0});
         rule.weights.push_back(w[i]);
      }
      break;
   }
   case 2: {
      // The Jacobian (1-u) raises the degree in u by one.
      gauss_legendre((order + 3) / 2, x, w);
      for (std::size_t i = 0; i < x.size(); ++i)
         for (std::size_t j = 0; j < x.size(); ++j) {
            const double px = x[i];
            const double py = x[j] * (1.0 - x[i]);
            rule.points.push_back({1.0 - px - py, px, py, 0.0});
            rule.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
         }
      break;
   }
   case 3: {
      gauss_legendre((order + 4) / 2, x, w);
      for (std::size_t i = 0; i < x.size(); ++i)
         for (std::size_t j = 0; j < x.size(); ++j)
            for (std::size_t k = 0; k < x.size(); ++k) {
               const double px = x[i];
               const double py = x[j] * (1.0 - x[i]);
               const double pz = x[k] * (1.0 - x[i]) * (1.0 - x[j]);
               rule.points.push_back({1.0 - px - py - pz, px, py, pz});
               rule.weights.push_back(w[i] * w[j] * w[k] * (1.0 - x[i]) * (1.0 - x[i]) * (1.0 - x[j]));
            }
      break;
   }
   default: throw std::invalid_argument("simplex_rule: dim must be 1, 2 or 3");
   }
   return rule;
}

} // namespace steklov
