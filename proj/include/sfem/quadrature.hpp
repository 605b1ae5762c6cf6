#pragma once

#include <vector>

#include "sfem/mesh.hpp"

namespace sfem {

/// Quadrature rule on the reference triangle (0,0)-(1,0)-(0,1), exact for
/// polynomials of total degree <= degree. Weights are positive and sum to
/// the reference area 1/2.
struct QuadratureRule {
  int degree = 0;
  std::vector<Vec2> points;
  std::vector<double> weights;
};

/// Rule of at least the requested exactness degree, built by collapsing a
/// tensor Gauss-Legendre grid onto the triangle. Cached per degree.
const QuadratureRule& triangle_quadrature(int degree);

/// Gauss-Legendre points and weights on [0,1], exact through the requested
/// polynomial degree.
struct SegmentRule {
  int degree = 0;
  std::vector<double> points;
  std::vector<double> weights;
};

const SegmentRule& segment_quadrature(int degree);

}  // namespace sfem
