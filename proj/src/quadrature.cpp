#include "smpnp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace smpnp {

namespace {

// Gauss-Legendre on [0, 1].
std::vector<std::pair<double, double>> gauss_legendre01(int k)
{
  // P_k(x) and its derivative.
  auto legendre = [k](double x, double& dp) {
    double p0 = 1, p1 = x;
    for (int n = 2; n <= k; ++n) {
      const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    dp = k * (x * p1 - p0) / (x * x - 1);
    return p1;
  };
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < k; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1 - x * x) * dp * dp);
    out.emplace_back(0.5 * (x + 1), 0.5 * w);
  }
  return out;
}

std::vector<TetQuadPoint> collapsed_tet(int k)
{
  const auto gl = gauss_legendre01(k);
  std::vector<TetQuadPoint> rule;
  double total = 0;
  for (const auto& [u, wu] : gl) {
    for (const auto& [v, wv] : gl) {
      for (const auto& [w, ww] : gl) {
        const double x = u;
        const double y = v * (1 - u);
        const double z = w * (1 - u) * (1 - v);
        const double weight = wu * wv * ww * (1 - u) * (1 - u) * (1 - v);
        rule.push_back({{1 - x - y - z, x, y, z}, weight});
        total += weight;
      }
    }
  }
  for (auto& q : rule) q.weight /= total;
  return rule;
}

std::vector<TriQuadPoint> collapsed_tri(int k)
{
  const auto gl = gauss_legendre01(k);
  std::vector<TriQuadPoint> rule;
  double total = 0;
  for (const auto& [u, wu] : gl) {
    for (const auto& [v, wv] : gl) {
      const double x = u;
      const double y = v * (1 - u);
      const double weight = wu * wv * (1 - u);
      rule.push_back({{1 - x - y, x, y}, weight});
      total += weight;
    }
  }
  for (auto& q : rule) q.weight /= total;
  return rule;
}

template <typename Rule, typename Make>
std::span<const Rule> cached(std::map<int, std::vector<Rule>>& cache, int key, Make make)
{
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make()).first;
  return it->second;
}

}  // namespace

std::span<const TetQuadPoint> tet_rule(int degree)
{
  static const std::vector<TetQuadPoint> centroid{{{0.25, 0.25, 0.25, 0.25}, 1.0}};
  constexpr double a = 0.5854101966249685;
  constexpr double b = 0.1381966011250105;
  static const std::vector<TetQuadPoint> four{
      {{a, b, b, b}, 0.25}, {{b, a, b, b}, 0.25}, {{b, b, a, b}, 0.25}, {{b, b, b, a}, 0.25}};
  if (degree < 0) throw std::invalid_argument("tet_rule: negative degree");
  if (degree <= 1) return centroid;
  if (degree == 2) return four;
  static std::map<int, std::vector<TetQuadPoint>> cache;
  // The u-direction integrand has degree `degree + 2`.
  const int k = (degree + 4) / 2;
  return cached(cache, k, [k] { return collapsed_tet(k); });
}

std::span<const TriQuadPoint> tri_rule(int degree)
{
  static const std::vector<TriQuadPoint> centroid{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}};
  static const std::vector<TriQuadPoint> three{
      {{2.0 / 3, 1.0 / 6, 1.0 / 6}, 1.0 / 3}, {{1.0 / 6, 2.0 / 3, 1.0 / 6}, 1.0 / 3}, {{1.0 / 6, 1.0 / 6, 2.0 / 3}, 1.0 / 3}};
  if (degree < 0) throw std::invalid_argument("tri_rule: negative degree");
  if (degree <= 1) return centroid;
  if (degree == 2) return three;
  static std::map<int, std::vector<TriQuadPoint>> cache;
  const int k = (degree + 3) / 2;
  return cached(cache, k, [k] { return collapsed_tri(k); });
}

}  // namespace smpnp
