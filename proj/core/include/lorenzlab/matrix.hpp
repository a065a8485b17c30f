#pragma once

#include <complex>
#include <vector>

namespace lorenzlab {

// Dense complex square matrix, row-major. Dimensions stay small (cocycle
// fibers, d <= 8 in practice), so the factorizations below are direct
// textbook implementations rather than a library binding.
class CMatrix {
 public:
  using value_type = std::complex<double>;

  CMatrix() = default;
  explicit CMatrix(int d) : d_(d), a_(static_cast<std::size_t>(d) * d) {}

  static CMatrix identity(int d);

  int dim() const { return d_; }

  value_type& at(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }
  const value_type& at(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }

  const std::vector<value_type>& data() const { return a_; }
  std::vector<value_type>& data() { return a_; }

  CMatrix operator*(const CMatrix& rhs) const;
  CMatrix operator+(const CMatrix& rhs) const;
  CMatrix operator-(const CMatrix& rhs) const;
  CMatrix scaled(value_type s) const;
  CMatrix adjoint() const;

  bool operator==(const CMatrix& rhs) const = default;

  double frobenius_norm() const;
  bool all_finite() const;

 private:
  int d_ = 0;
  std::vector<value_type> a_;
};

std::complex<double> determinant(const CMatrix& m);  // LU with partial pivoting

CMatrix inverse(const CMatrix& m);  // throws SingularMatrixError

// Singular values in descending order via one-sided Jacobi iteration
// (column-orthogonalization), converged to ~1e-13 relative.
std::vector<double> singular_values(const CMatrix& m);

double operator_norm(const CMatrix& m);  // largest singular value

struct QrResult {
  CMatrix q;
  CMatrix r;  // upper triangular with real, nonnegative diagonal
};

// Householder QR with the diagonal-phase convention fixed so the
// factorization is unique for invertible input.
QrResult qr_positive(const CMatrix& m);

}  // namespace lorenzlab
