#include "smpnp/sparse.hpp"

#include <array>
#include <cmath>
#include <string>

namespace smpnp {

std::vector<double> small_dense_solve(std::span<const double> a, std::span<const double> b)
{
  const int n = static_cast<int>(b.size());
  if (n > kMaxDenseSize) throw std::invalid_argument("small_dense_solve: n > " + std::to_string(kMaxDenseSize));
  if (a.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("small_dense_solve: shape mismatch");

  std::array<double, kMaxDenseSize * kMaxDenseSize> m{};
  std::array<double, kMaxDenseSize> x{};
  for (int i = 0; i < n * n; ++i) m[i] = a[i];
  for (int i = 0; i < n; ++i) x[i] = b[i];

  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(m[i * n + k]) > std::abs(m[piv * n + k])) piv = i;
    }
    if (!(std::abs(m[piv * n + k]) >= 1e-14)) {
      throw LinearSolveError("small_dense_solve: singular matrix (pivot below 1e-14 in column " + std::to_string(k) + ")");
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      std::swap(x[k], x[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = m[i * n + k] / m[k * n + k];
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      x[i] -= f * x[k];
    }
  }
  std::vector<double> out(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s -= m[i * n + j] * out[j];
    out[i] = s / m[i * n + i];
  }
  return out;
}

}  // namespace smpnp
