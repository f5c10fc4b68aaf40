#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smpnp {

class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square matrix in compressed-row storage. Column indices are sorted and
/// unique within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Validates the CSR invariants; throws std::invalid_argument.
  SparseMatrix(int n, std::vector<int> row_offsets, std::vector<int> columns, std::vector<double> values);

  int size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Position of (i, j) in values(), or -1 if structurally absent.
  int find(int i, int j) const;
  double at(int i, int j) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

 private:
  int n_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Accumulates (i, j, v) entries; duplicates are summed. No drop tolerance.
class TripletBuilder {
 public:
  explicit TripletBuilder(int n) : n_(n) {}
  void add(int i, int j, double v) { entries_.push_back({i, j, v}); }
  void reserve(std::size_t n) { entries_.reserve(n); }
  SparseMatrix build() const;

 private:
  struct Entry {
    int i, j;
    double v;
  };
  int n_;
  std::vector<Entry> entries_;
};

enum class SolveMethod { Direct, KrylovILU0 };

struct LinearSolveSpec {
  SolveMethod method = SolveMethod::KrylovILU0;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iterations = 2000;
  int restart = 30;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0;  // ‖Ax − b‖₂ of the returned x
};

/// ILU(0) factors stored on the pattern of A (unit-lower L and U share it).
class Ilu0 {
 public:
  explicit Ilu0(const SparseMatrix& a);

  /// z = (LU)⁻¹ r
  void apply(std::span<const double> r, std::span<double> z) const;
  const SparseMatrix& factors() const { return lu_; }

 private:
  SparseMatrix lu_;
  std::vector<int> diag_;
};

/// Restarted GMRES with left ILU(0) preconditioning. Stops when the true
/// residual satisfies ‖Ax − b‖₂ ≤ max(abs_tol, rel_tol·‖b‖₂); throws
/// LinearSolveError with the final residual after max_iterations.
std::vector<double> gmres(const SparseMatrix& a, std::span<const double> b, const Ilu0& precond,
                          const LinearSolveSpec& spec, SolveStats* stats = nullptr,
                          std::span<const double> x0 = {});

/// Factor once, solve many right-hand sides. The matrix must outlive the
/// solver.
class LinearSolver {
 public:
  LinearSolver(const SparseMatrix& a, const LinearSolveSpec& spec);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  std::vector<double> solve(std::span<const double> b, SolveStats* stats = nullptr) const;
  const LinearSolveSpec& spec() const { return spec_; }

 private:
  struct DirectLU;
  const SparseMatrix* a_;
  LinearSolveSpec spec_;
  std::unique_ptr<DirectLU> lu_;
  std::unique_ptr<Ilu0> ilu_;
};

std::vector<double> solve(const SparseMatrix& a, std::span<const double> b, const LinearSolveSpec& spec,
                          SolveStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Small dense systems (Newton equations, n ≤ 8).

inline constexpr int kMaxDenseSize = 8;

/// Solves A x = b by Gaussian elimination with partial pivoting. `a` is
/// row-major n×n. Throws LinearSolveError if a pivot falls below 1e-14.
std::vector<double> small_dense_solve(std::span<const double> a, std::span<const double> b);

double norm2(std::span<const double> x);

}  // namespace smpnp
