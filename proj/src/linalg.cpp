#include "fpi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <umfpack.h>

namespace fpi {

// ---------------------------------------------------------------------------
// Triplets / CSR

void TripletBuffer::add(int row, int col, double value) {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
    throw std::out_of_range("TripletBuffer: index (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  row_.push_back(row);
  col_.push_back(col);
  vals_.push_back(value);
}

void TripletBuffer::reserve(std::size_t n) {
  row_.reserve(n);
  col_.reserve(n);
  vals_.reserve(n);
}

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                     std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (static_cast<int>(row_ptr_.size()) != rows_ + 1 || col_idx_.size() != values_.size() ||
      row_ptr_.back() != static_cast<int>(values_.size()))
    throw std::invalid_argument("CsrMatrix: inconsistent arrays");
}

CsrMatrix to_csr(const TripletBuffer& t) {
  const int rows = t.rows();
  const auto& ri = t.row_indices();
  const auto& ci = t.col_indices();
  const auto& vi = t.values();

  // Counting sort by row, then sort each row by column and merge duplicates.
  std::vector<int> count(rows + 1, 0);
  for (int r : ri) ++count[r + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<int> order(ri.size());
  {
    std::vector<int> next(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < ri.size(); ++k) order[next[ri[k]]++] = static_cast<int>(k);
  }

  std::vector<int> row_ptr(rows + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  cols.reserve(ri.size());
  vals.reserve(ri.size());
  for (int r = 0; r < rows; ++r) {
    auto first = order.begin() + count[r];
    auto last = order.begin() + count[r + 1];
    std::stable_sort(first, last, [&](int a, int b) { return ci[a] < ci[b]; });
    for (auto it = first; it != last; ++it) {
      if (!cols.empty() && static_cast<int>(cols.size()) > row_ptr[r] && cols.back() == ci[*it])
        vals.back() += vi[*it];
      else {
        cols.push_back(ci[*it]);
        vals.push_back(vi[*it]);
      }
    }
    row_ptr[r + 1] = static_cast<int>(cols.size());
  }
  return CsrMatrix(rows, t.cols(), std::move(row_ptr), std::move(cols), std::move(vals));
}

double CsrMatrix::at(int row, int col) const {
  auto first = col_idx_.begin() + row_ptr_[row];
  auto last = col_idx_.begin() + row_ptr_[row + 1];
  auto it = std::lower_bound(first, last, col);
  return (it != last && *it == col) ? values_[it - col_idx_.begin()] : 0.0;
}

Eigen::VectorXd CsrMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) throw std::invalid_argument("CsrMatrix::multiply: size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows_);
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x(col_idx_[k]);
    y(r) = s;
  }
  return y;
}

Eigen::VectorXd CsrMatrix::multiply_transpose(const Eigen::VectorXd& x) const {
  if (x.size() != rows_) throw std::invalid_argument("CsrMatrix::multiply_transpose: size mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y(col_idx_[k]) += values_[k] * x(r);
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  TripletBuffer t(cols_, rows_);
  t.reserve(nnz());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.add(col_idx_[k], r, values_[k]);
  return to_csr(t);
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) += values_[k];
  return d;
}

Eigen::MatrixXd CsrMatrix::dense_block(std::span<const int> rows, std::span<const int> cols) const {
  std::vector<int> col_pos(cols_, -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<int>(j);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (col_pos[col_idx_[k]] >= 0) d(i, col_pos[col_idx_[k]]) = values_[k];
  }
  return d;
}

double CsrMatrix::asymmetry() const {
  double worst = 0.0;
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - at(col_idx_[k], r)));
  return worst;
}

// ---------------------------------------------------------------------------
// Sparse LU

struct SparseLu::Impl {
  CsrMatrix matrix;
  void* numeric = nullptr;
  double control[UMFPACK_CONTROL];

  ~Impl() {
    if (numeric) umfpack_di_free_numeric(&numeric);
  }
};

SparseLu::SparseLu(const CsrMatrix& matrix) : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("SparseLu: matrix must be square");
  impl_->matrix = matrix;
  const int n = matrix.rows();
  umfpack_di_defaults(impl_->control);
  impl_->control[UMFPACK_PRL] = 0;

  // The CSR arrays are the CSC arrays of A^T; solves use UMFPACK_At.
  const int* ap = matrix.row_ptr().data();
  const int* ai = matrix.col_idx().data();
  const double* ax = matrix.values().data();
  double info[UMFPACK_INFO];
  void* symbolic = nullptr;
  int status = umfpack_di_symbolic(n, n, ap, ai, ax, &symbolic, impl_->control, info);
  if (status != UMFPACK_OK) throw std::runtime_error("SparseLu: symbolic analysis failed, status " + std::to_string(status));
  status = umfpack_di_numeric(ap, ai, ax, symbolic, &impl_->numeric, impl_->control, info);
  umfpack_di_free_symbolic(&symbolic);
  // A singular warning still leaves factors behind; the pivot scan below reports it.
  if (status < 0) throw std::runtime_error("SparseLu: numeric factorization failed, status " + std::to_string(status));

  // Pivots of the row-scaled factorization; rows are sum-scaled, so the row scale is 1.
  std::vector<double> udiag(n);
  std::vector<int> q(n);
  int do_recip = 0;
  std::vector<double> rs(n);
  status = umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, q.data(),
                                  udiag.data(), &do_recip, rs.data(), impl_->numeric);
  if (status != UMFPACK_OK) throw std::runtime_error("SparseLu: cannot inspect factors");
  for (int k = 0; k < n; ++k)
    if (!(std::abs(udiag[k]) >= 1e-14))
      throw SingularMatrixError("SparseLu: numerically singular matrix, pivot " + std::to_string(k) +
                                    " (original index " + std::to_string(q[k]) + ") = " +
                                    std::to_string(udiag[k]),
                                q[k]);
}

SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

Eigen::VectorXd SparseLu::solve(const Eigen::VectorXd& rhs) const {
  const CsrMatrix& a = impl_->matrix;
  if (rhs.size() != a.rows()) throw std::invalid_argument("SparseLu::solve: size mismatch");
  Eigen::VectorXd x(a.rows());
  double info[UMFPACK_INFO];
  const int status = umfpack_di_solve(UMFPACK_At, a.row_ptr().data(), a.col_idx().data(), a.values().data(),
                                      x.data(), rhs.data(), impl_->numeric, impl_->control, info);
  if (status != UMFPACK_OK) throw std::runtime_error("SparseLu::solve failed, status " + std::to_string(status));
  const double bnorm = rhs.norm();
  if (bnorm > 0.0) {
    const double rel = (a.multiply(x) - rhs).norm() / bnorm;
    if (!(rel <= 1e-10)) throw std::runtime_error("SparseLu::solve: relative residual " + std::to_string(rel));
  }
  return x;
}

Eigen::VectorXd solve_sparse(const CsrMatrix& matrix, const Eigen::VectorXd& rhs) {
  return SparseLu(matrix).solve(rhs);
}

// ---------------------------------------------------------------------------
// Eliminated systems

EliminatedSystem::EliminatedSystem(CsrMatrix matrix, std::vector<int> fixed_dofs)
    : original_(std::move(matrix)), fixed_(std::move(fixed_dofs)) {
  const int n = original_.rows();
  fixed_flag_.assign(n, 0);
  for (int d : fixed_) {
    if (d < 0 || d >= n) throw std::out_of_range("EliminatedSystem: fixed dof out of range");
    fixed_flag_[d] = 1;
  }
  std::sort(fixed_.begin(), fixed_.end());
  fixed_.erase(std::unique(fixed_.begin(), fixed_.end()), fixed_.end());

  TripletBuffer t(n, n);
  t.reserve(original_.nnz());
  const auto& rp = original_.row_ptr();
  const auto& ci = original_.col_idx();
  const auto& v = original_.values();
  for (int r = 0; r < n; ++r) {
    if (fixed_flag_[r]) {
      t.add(r, r, 1.0);
      continue;
    }
    for (int k = rp[r]; k < rp[r + 1]; ++k)
      if (!fixed_flag_[ci[k]]) t.add(r, ci[k], v[k]);
  }
  constrained_ = to_csr(t);
  lu_ = std::make_unique<SparseLu>(constrained_);
}

Eigen::VectorXd EliminatedSystem::solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& fixed_values) const {
  const int n = original_.rows();
  if (rhs.size() != n || fixed_values.size() != n)
    throw std::invalid_argument("EliminatedSystem::solve: size mismatch");
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(n);
  for (int d : fixed_) lift(d) = fixed_values(d);
  Eigen::VectorXd b = rhs - original_.multiply(lift);
  for (int d : fixed_) b(d) = fixed_values(d);
  return lu_->solve(b);
}

Eigen::VectorXd EliminatedSystem::solve(const Eigen::VectorXd& rhs) const {
  return solve(rhs, Eigen::VectorXd::Zero(rhs.size()));
}

// ---------------------------------------------------------------------------
// Dense pencils

GeneralizedEigen generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("generalized_eig: dimension mismatch");
  const double sa = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double sb = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sa ||
      (b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sb)
    throw std::invalid_argument("generalized_eig: matrices must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> chol(b);
  if (chol.info() != Eigen::Success) throw std::invalid_argument("generalized_eig: B is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("generalized_eig: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd fractional_gram(const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiffness, double s) {
  if (s == 0.0) return mass;
  const GeneralizedEigen pencil = generalized_eig(stiffness + mass, mass);
  const Eigen::MatrixXd mv = mass * pencil.vectors;
  const Eigen::VectorXd powers = pencil.values.array().pow(s);
  Eigen::MatrixXd gram = mv * powers.asDiagonal() * mv.transpose();
  return 0.5 * (gram + gram.transpose());
}

}  // namespace fpi
