#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fracfem {

using Vector = std::vector<double>;

/// Row-major dense matrix.
struct DenseMatrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
};

Vector matvec(const DenseMatrix& A, const Vector& x);

/// In-place lower Cholesky factorization. Throws with the failing pivot index
/// if the matrix is not numerically SPD.
void cholesky_inplace(DenseMatrix& A);

/// Solves L L^T x = b given the factor from cholesky_inplace (b overwritten).
void cholesky_solve(const DenseMatrix& L, Vector& b);

/// Preconditioned (Jacobi) conjugate gradient; returns iteration count.
int cg_solve(const DenseMatrix& A, const Vector& b, Vector& x, double rel_tol, int max_iter);

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations
/// (test/diagnostic sizes only).
Vector symmetric_eigenvalues(DenseMatrix A);

double max_abs(const DenseMatrix& A);
double max_abs_offsym(const DenseMatrix& A); // max |A - A^T| entry

/// Binary dump: 8-byte magic "FRACMAT1", uint64 row count, row-major doubles.
void write_matrix_binary(const DenseMatrix& A, const std::string& path);
DenseMatrix read_matrix_binary(const std::string& path);

} // namespace fracfem
