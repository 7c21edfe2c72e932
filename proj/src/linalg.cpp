#include "fracfem/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace fracfem {

Vector matvec(const DenseMatrix& A, const Vector& x) {
  Vector y(A.rows, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    const double* ai = A.row(i);
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

void cholesky_inplace(DenseMatrix& A) {
  const int n = A.rows;
  for (int j = 0; j < n; ++j) {
    double* aj = A.row(j);
    double d = aj[j];
    for (int k = 0; k < j; ++k) d -= aj[k] * aj[k];
    if (!(d > 0.0)) throw std::runtime_error("cholesky: matrix not SPD at pivot " + std::to_string(j));
    const double ljj = std::sqrt(d);
    aj[j] = ljj;
    const double inv = 1.0 / ljj;
#pragma omp parallel for schedule(static)
    for (int i = j + 1; i < n; ++i) {
      double* ai = A.row(i);
      double s = ai[j];
      for (int k = 0; k < j; ++k) s -= ai[k] * aj[k];
      ai[j] = s * inv;
    }
  }
  // zero out the strict upper triangle so the factor is self-describing
  for (int i = 0; i < n; ++i) {
    double* ai = A.row(i);
    for (int j = i + 1; j < n; ++j) ai[j] = 0.0;
  }
}

void cholesky_solve(const DenseMatrix& L, Vector& b) {
  const int n = L.rows;
  for (int i = 0; i < n; ++i) {
    const double* li = L.row(i);
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= li[k] * b[k];
    b[i] = s / li[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= L(k, i) * b[k];
    b[i] = s / L(i, i);
  }
}

int cg_solve(const DenseMatrix& A, const Vector& b, Vector& x, double rel_tol, int max_iter) {
  const int n = A.rows;
  if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);
  Vector r = b, z(n), p(n), Ap(n);
  {
    Vector Ax = matvec(A, x);
    for (int i = 0; i < n; ++i) r[i] -= Ax[i];
  }
  Vector dinv(n);
  for (int i = 0; i < n; ++i) dinv[i] = 1.0 / A(i, i);
  double bnorm = 0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0) { x.assign(n, 0.0); return 0; }
  double rz = 0;
  for (int i = 0; i < n; ++i) { z[i] = dinv[i] * r[i]; rz += r[i] * z[i]; }
  p = z;
  for (int it = 1; it <= max_iter; ++it) {
    Ap = matvec(A, p);
    double pAp = 0;
    for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
    const double alpha = rz / pAp;
    double rnorm = 0;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
      rnorm += r[i] * r[i];
    }
    if (std::sqrt(rnorm) <= rel_tol * bnorm) return it;
    double rz_new = 0;
    for (int i = 0; i < n; ++i) { z[i] = dinv[i] * r[i]; rz_new += r[i] * z[i]; }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw std::runtime_error("cg_solve: no convergence within iteration budget");
}

Vector symmetric_eigenvalues(DenseMatrix A) {
  const int n = A.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-28 * (n * n)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev(n);
  for (int i = 0; i < n; ++i) ev[i] = A(i, i);
  return ev;
}

double max_abs(const DenseMatrix& A) {
  double m = 0;
  for (double v : A.a) m = std::max(m, std::fabs(v));
  return m;
}

double max_abs_offsym(const DenseMatrix& A) {
  double m = 0;
  for (int i = 0; i < A.rows; ++i)
    for (int j = i + 1; j < A.cols; ++j) m = std::max(m, std::fabs(A(i, j) - A(j, i)));
  return m;
}

void write_matrix_binary(const DenseMatrix& A, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  char magic[8] = {'F', 'R', 'A', 'C', 'M', 'A', 'T', '1'};
  std::fwrite(magic, 1, 8, f);
  const uint64_t n = static_cast<uint64_t>(A.rows);
  std::fwrite(&n, 8, 1, f);
  std::fwrite(A.a.data(), sizeof(double), A.a.size(), f);
  std::fclose(f);
}

DenseMatrix read_matrix_binary(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  uint64_t n = 0;
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, "FRACMAT1", 8) != 0 ||
      std::fread(&n, 8, 1, f) != 1) {
    std::fclose(f);
    throw std::runtime_error("bad matrix file header: " + path);
  }
  DenseMatrix A(static_cast<int>(n), static_cast<int>(n));
  const size_t got = std::fread(A.a.data(), sizeof(double), A.a.size(), f);
  std::fclose(f);
  if (got != A.a.size()) throw std::runtime_error("truncated matrix file: " + path);
  return A;
}

} // namespace fracfem
