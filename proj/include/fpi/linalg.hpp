#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fpi {

/// Thrown when a factorization meets a (numerically) zero pivot.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, long pivot) : std::runtime_error(what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

class TripletBuffer {
 public:
  TripletBuffer(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int row, int col, double value);
  void reserve(std::size_t n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return vals_.size(); }

  const std::vector<int>& row_indices() const { return row_; }
  const std::vector<int>& col_indices() const { return col_; }
  const std::vector<double>& values() const { return vals_; }

 private:
  int rows_, cols_;
  std::vector<int> row_, col_;
  std::vector<double> vals_;
};

/// Compressed sparse rows with sorted, duplicate-free column indices.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
            std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Stored value or 0.
  double at(int row, int col) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& x) const;
  CsrMatrix transpose() const;
  Eigen::MatrixXd to_dense() const;
  /// Dense submatrix on the given row and column index lists.
  Eigen::MatrixXd dense_block(std::span<const int> rows, std::span<const int> cols) const;
  /// max |A - A^T| over stored entries.
  double asymmetry() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

CsrMatrix to_csr(const TripletBuffer& triplets);

/// Sparse LU factorization (UMFPACK). Factor once, solve many right-hand sides.
class SparseLu {
 public:
  explicit SparseLu(const CsrMatrix& matrix);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;
  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;

  /// Throws std::runtime_error when the relative residual exceeds 1e-10.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve_sparse(const CsrMatrix& matrix, const Eigen::VectorXd& rhs);

/// Matrix with strongly imposed DOFs, eliminated symmetrically: fixed rows and
/// columns become identity rows/columns and their couplings move to the
/// right-hand side. The factorization depends only on which DOFs are fixed,
/// so it is computed once and reused for any data.
class EliminatedSystem {
 public:
  EliminatedSystem(CsrMatrix matrix, std::vector<int> fixed_dofs);

  /// `fixed_values` is full length; only its entries at fixed DOFs are read.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& fixed_values) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  const CsrMatrix& matrix() const { return original_; }
  const CsrMatrix& constrained_matrix() const { return constrained_; }
  const std::vector<int>& fixed_dofs() const { return fixed_; }
  bool is_fixed(int dof) const { return fixed_flag_[dof] != 0; }

 private:
  CsrMatrix original_;
  CsrMatrix constrained_;
  std::vector<int> fixed_;
  std::vector<char> fixed_flag_;
  std::unique_ptr<SparseLu> lu_;
};

/// Dense symmetric-definite pencil A v = lambda B v.
struct GeneralizedEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< B-orthonormal columns
};
GeneralizedEigen generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Gram matrix of the discrete H^s norm from mass M and stiffness K:
/// M V diag(mu^s) V^T M for (K + M) v = mu M v.
Eigen::MatrixXd fractional_gram(const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiffness, double s);

}  // namespace fpi
