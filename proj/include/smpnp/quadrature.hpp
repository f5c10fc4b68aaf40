#pragma once

#include <array>
#include <span>

namespace smpnp {

// Weights are normalized to sum to one; multiply by the element measure.
struct TetQuadPoint {
  std::array<double, 4> bary;
  double weight;
};

struct TriQuadPoint {
  std::array<double, 3> bary;
  double weight;
};

/// Rule exact for polynomials of total degree `degree` on a tetrahedron.
/// Degrees 1 and 2 use the centroid and the classic 4-point rule; higher
/// degrees use collapsed Gauss-Legendre product rules.
std::span<const TetQuadPoint> tet_rule(int degree);

/// Same for triangles.
std::span<const TriQuadPoint> tri_rule(int degree);

}  // namespace smpnp
