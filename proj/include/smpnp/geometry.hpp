#pragma once

#include <array>
#include <cmath>

namespace smpnp {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Six times the signed volume of (a, b, c, d); positive for right-handed ordering.
inline double signed_volume6(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
  return dot(b - a, cross(c - a, d - a));
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
  return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace smpnp
