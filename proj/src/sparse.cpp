#include "smpnp/sparse.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace smpnp {

SparseMatrix::SparseMatrix(int n, std::vector<int> row_offsets, std::vector<int> columns,
                           std::vector<double> values)
    : n_(n), row_offsets_(std::move(row_offsets)), columns_(std::move(columns)), values_(std::move(values))
{
  if (n_ < 0 || row_offsets_.size() != static_cast<std::size_t>(n_) + 1 || row_offsets_.front() != 0) {
    throw std::invalid_argument("SparseMatrix: bad row offsets");
  }
  if (columns_.size() != values_.size() || static_cast<std::size_t>(row_offsets_.back()) != columns_.size()) {
    throw std::invalid_argument("SparseMatrix: offsets, columns and values disagree");
  }
  for (int i = 0; i < n_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) throw std::invalid_argument("SparseMatrix: offsets not monotone");
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (columns_[k] < 0 || columns_[k] >= n_) throw std::invalid_argument("SparseMatrix: column out of range");
      if (k > row_offsets_[i] && columns_[k] <= columns_[k - 1]) {
        throw std::invalid_argument("SparseMatrix: columns not sorted and unique in row " + std::to_string(i));
      }
      if (!std::isfinite(values_[k])) throw std::invalid_argument("SparseMatrix: non-finite value");
    }
  }
}

int SparseMatrix::find(int i, int j) const
{
  const auto first = columns_.begin() + row_offsets_[i];
  const auto last = columns_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(first, last, j);
  return it != last && *it == j ? static_cast<int>(it - columns_.begin()) : -1;
}

double SparseMatrix::at(int i, int j) const
{
  const int k = find(i, j);
  return k < 0 ? 0.0 : values_[k];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
  for (int i = 0; i < n_; ++i) {
    double s = 0;
    for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const
{
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

SparseMatrix TripletBuilder::build() const
{
  std::vector<Entry> e = entries_;
  std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  std::vector<int> offsets(n_ + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(e.size());
  vals.reserve(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k].i < 0 || e[k].i >= n_ || e[k].j < 0 || e[k].j >= n_) {
      throw std::invalid_argument("TripletBuilder: index out of range");
    }
    if (!cols.empty() && k > 0 && e[k].i == e[k - 1].i && e[k].j == e[k - 1].j) {
      vals.back() += e[k].v;
      continue;
    }
    cols.push_back(e[k].j);
    vals.push_back(e[k].v);
    ++offsets[e[k].i + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseMatrix(n_, std::move(offsets), std::move(cols), std::move(vals));
}

void LinearSolveSpec::validate() const
{
  if (!(abs_tol > 0) || !(rel_tol > 0)) throw std::invalid_argument("linear solve tolerances must be positive");
  if (max_iterations < 1 || restart < 1) throw std::invalid_argument("linear solve iteration limits must be positive");
}

double norm2(std::span<const double> x)
{
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace {

double residual_norm(const SparseMatrix& a, std::span<const double> x, std::span<const double> b,
                     std::vector<double>& r)
{
  r.resize(b.size());
  a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r);
}

}  // namespace

struct LinearSolver::DirectLU {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LinearSolver::LinearSolver(const SparseMatrix& a, const LinearSolveSpec& spec) : a_(&a), spec_(spec)
{
  spec_.validate();
  if (spec_.method == SolveMethod::KrylovILU0) {
    ilu_ = std::make_unique<Ilu0>(a);
    return;
  }
  const int n = a.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.nonzeros());
  const auto off = a.row_offsets();
  const auto cols = a.columns();
  const auto vals = a.values();
  for (int i = 0; i < n; ++i) {
    for (int k = off[i]; k < off[i + 1]; ++k) trips.emplace_back(i, cols[k], vals[k]);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  lu_ = std::make_unique<DirectLU>();
  lu_->lu.analyzePattern(m);
  lu_->lu.factorize(m);
  if (lu_->lu.info() != Eigen::Success) {
    throw LinearSolveError("direct solve: singular pivot during LU factorization (" + lu_->lu.lastErrorMessage() + ")");
  }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

std::vector<double> LinearSolver::solve(std::span<const double> b, SolveStats* stats) const
{
  if (b.size() != static_cast<std::size_t>(a_->size())) throw std::invalid_argument("solve: rhs length mismatch");
  if (ilu_) return gmres(*a_, b, *ilu_, spec_, stats);

  const int n = a_->size();
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd x = lu_->lu.solve(bv);
  std::vector<double> xs(x.data(), x.data() + n);
  std::vector<double> r;
  const double target = 1e-10 * (1.0 + norm2(b));
  double res = residual_norm(*a_, xs, b, r);
  // Iterative refinement for badly scaled operators.
  int steps = 0;
  for (; res > target && steps < 3; ++steps) {
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), n);
    Eigen::VectorXd dx = lu_->lu.solve(rv);
    for (int i = 0; i < n; ++i) xs[i] += dx[i];
    res = residual_norm(*a_, xs, b, r);
  }
  if (!std::isfinite(res) || res > target) {
    throw LinearSolveError("direct solve: residual " + std::to_string(res) + " exceeds " + std::to_string(target));
  }
  if (stats != nullptr) *stats = {steps, res};
  return xs;
}

std::vector<double> solve(const SparseMatrix& a, std::span<const double> b, const LinearSolveSpec& spec,
                          SolveStats* stats)
{
  return LinearSolver(a, spec).solve(b, stats);
}

}  // namespace smpnp
