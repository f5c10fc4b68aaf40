#include "smpnp/sparse.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace smpnp {

Ilu0::Ilu0(const SparseMatrix& a) : lu_(a), diag_(a.size(), -1)
{
  const int n = a.size();
  const auto off = lu_.row_offsets();
  const auto col = lu_.columns();
  auto val = lu_.values();

  for (int i = 0; i < n; ++i) {
    diag_[i] = lu_.find(i, i);
    if (diag_[i] < 0) throw LinearSolveError("ILU(0): structurally missing diagonal in row " + std::to_string(i));
  }

  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int p = off[i]; p < off[i + 1]; ++p) pos[col[p]] = p;
    for (int p = off[i]; p < off[i + 1] && col[p] < i; ++p) {
      const int k = col[p];
      const double pivot = val[diag_[k]];
      if (pivot == 0.0) throw LinearSolveError("ILU(0): zero pivot in row " + std::to_string(k));
      val[p] /= pivot;
      const double lik = val[p];
      for (int q = diag_[k] + 1; q < off[k + 1]; ++q) {
        const int target = pos[col[q]];
        if (target >= 0) val[target] -= lik * val[q];
      }
    }
    for (int p = off[i]; p < off[i + 1]; ++p) pos[col[p]] = -1;
    if (val[diag_[i]] == 0.0 || !std::isfinite(val[diag_[i]])) {
      throw LinearSolveError("ILU(0): zero pivot in row " + std::to_string(i));
    }
  }
}

void Ilu0::apply(std::span<const double> r, std::span<double> z) const
{
  const int n = lu_.size();
  const auto off = lu_.row_offsets();
  const auto col = lu_.columns();
  const auto val = lu_.values();
  for (int i = 0; i < n; ++i) {
    double s = r[i];
    for (int p = off[i]; p < diag_[i]; ++p) s -= val[p] * z[col[p]];
    z[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = z[i];
    for (int p = diag_[i] + 1; p < off[i + 1]; ++p) s -= val[p] * z[col[p]];
    z[i] = s / val[diag_[i]];
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> gmres(const SparseMatrix& a, std::span<const double> b, const Ilu0& precond,
                          const LinearSolveSpec& spec, SolveStats* stats, std::span<const double> x0)
{
  spec.validate();
  const int n = a.size();
  if (b.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("gmres: rhs length mismatch");

  std::vector<double> x(n, 0.0);
  if (!x0.empty()) x.assign(x0.begin(), x0.end());
  if (n == 0) return x;

  const double target = std::max(spec.abs_tol, spec.rel_tol * norm2(b));
  const int m = std::min(spec.restart, n);

  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<double> h((m + 1) * m, 0.0);
  auto H = [&](int i, int j) -> double& { return h[i * m + j]; };
  std::vector<double> cs(m), sn(m), g(m + 1), y(m);
  std::vector<double> r(n), w(n), tmp(n);

  int total = 0;
  auto true_residual = [&] {
    a.multiply(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(r);
  };

  double rnorm = true_residual();
  while (rnorm > target) {
    if (total >= spec.max_iterations) {
      throw LinearSolveError("GMRES-ILU(0): no convergence after " + std::to_string(total) +
                             " iterations, final residual " + std::to_string(rnorm) + " (target " +
                             std::to_string(target) + ")");
    }
    precond.apply(r, v[0]);
    const double beta = norm2(v[0]);
    if (!(beta > 0) || !std::isfinite(beta)) throw LinearSolveError("GMRES-ILU(0): preconditioner breakdown");
    // Converts preconditioned residual estimates back to true residual scale.
    const double ratio = rnorm / beta;
    for (double& e : v[0]) e /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    while (j < m && total < spec.max_iterations) {
      a.multiply(v[j], tmp);
      precond.apply(tmp, w);
      ++total;
      for (int i = 0; i <= j; ++i) {
        H(i, j) = dot(w, v[i]);
        for (int k = 0; k < n; ++k) w[k] -= H(i, j) * v[i][k];
      }
      H(j + 1, j) = norm2(w);
      const bool breakdown = !(H(j + 1, j) > 1e-300);
      if (!breakdown) {
        for (int k = 0; k < n; ++k) v[j + 1][k] = w[k] / H(j + 1, j);
      }
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++j;
      if (breakdown || std::abs(g[j]) * ratio <= 0.5 * target) break;
    }

    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H(i, k) * y[k];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < j; ++i) {
      for (int k = 0; k < n; ++k) x[k] += y[i] * v[i][k];
    }
    rnorm = true_residual();
    if (!std::isfinite(rnorm)) throw LinearSolveError("GMRES-ILU(0): residual became non-finite");
  }

  if (stats != nullptr) *stats = {total, rnorm};
  return x;
}

}  // namespace smpnp
