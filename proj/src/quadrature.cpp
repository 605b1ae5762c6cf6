#include "sfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace sfem {

namespace {

// Gauss-Legendre nodes on [-1,1] by Newton iteration on the three-term
// recurrence. n up to a few dozen is all this project ever asks for.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

QuadratureRule build_triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_quadrature: negative degree");
  // The collapsed integrand gains one degree in the first coordinate, so n
  // Gauss points per direction handle total degree 2n-2.
  const int n = (degree + 3) / 2;
  std::vector<double> gx, gw;
  gauss_legendre(n, gx, gw);

  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 * (gx[i] + 1.0);
    const double wx = 0.5 * gw[i];
    for (int j = 0; j < n; ++j) {
      const double y = 0.5 * (gx[j] + 1.0) * (1.0 - x);
      const double wy = 0.5 * gw[j] * (1.0 - x);
      rule.points.push_back({x, y});
      rule.weights.push_back(wx * wy);
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& triangle_quadrature(int degree) {
  static std::map<int, QuadratureRule> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_triangle_rule(degree)).first;
  return it->second;
}

const SegmentRule& segment_quadrature(int degree) {
  static std::map<int, SegmentRule> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) {
    if (degree < 0) throw std::invalid_argument("segment_quadrature: negative degree");
    const int n = degree / 2 + 1;
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    SegmentRule rule;
    rule.degree = degree;
    for (int i = 0; i < n; ++i) {
      rule.points.push_back(0.5 * (gx[i] + 1.0));
      rule.weights.push_back(0.5 * gw[i]);
    }
    it = cache.emplace(degree, std::move(rule)).first;
  }
  return it->second;
}

}  // namespace sfem
