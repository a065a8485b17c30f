#include "lorenzlab/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "lorenzlab/errors.hpp"

namespace lorenzlab {

using C = std::complex<double>;

CMatrix CMatrix::identity(int d) {
  CMatrix m(d);
  for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
  CMatrix out(d_);
  for (int i = 0; i < d_; ++i) {
    for (int k = 0; k < d_; ++k) {
      const C aik = at(i, k);
      if (aik == C{}) continue;
      for (int j = 0; j < d_; ++j) out.at(i, j) += aik * rhs.at(k, j);
    }
  }
  return out;
}

CMatrix CMatrix::operator+(const CMatrix& rhs) const {
  CMatrix out(d_);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + rhs.a_[i];
  return out;
}

CMatrix CMatrix::operator-(const CMatrix& rhs) const {
  CMatrix out(d_);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] - rhs.a_[i];
  return out;
}

CMatrix CMatrix::scaled(C s) const {
  CMatrix out(d_);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] * s;
  return out;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(d_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) out.at(j, i) = std::conj(at(i, j));
  return out;
}

double CMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const C& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

bool CMatrix::all_finite() const {
  for (const C& v : a_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

namespace {

// LU factorization with partial pivoting; returns the permutation sign and
// leaves L\U packed in a. Returns false when a pivot vanishes.
bool lu_decompose(CMatrix& a, std::vector<int>& perm, int& sign) {
  const int d = a.dim();
  perm.resize(d);
  for (int i = 0; i < d; ++i) perm[i] = i;
  sign = 1;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    double best = std::abs(a.at(col, col));
    for (int r = col + 1; r < d; ++r) {
      const double v = std::abs(a.at(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return false;
    if (piv != col) {
      for (int j = 0; j < d; ++j) std::swap(a.at(piv, j), a.at(col, j));
      std::swap(perm[piv], perm[col]);
      sign = -sign;
    }
    const C inv_p = 1.0 / a.at(col, col);
    for (int r = col + 1; r < d; ++r) {
      const C f = a.at(r, col) * inv_p;
      a.at(r, col) = f;
      for (int j = col + 1; j < d; ++j) a.at(r, j) -= f * a.at(col, j);
    }
  }
  return true;
}

}  // namespace

C determinant(const CMatrix& m) {
  CMatrix a = m;
  std::vector<int> perm;
  int sign = 1;
  if (!lu_decompose(a, perm, sign)) return C{0.0, 0.0};
  C det = static_cast<double>(sign);
  for (int i = 0; i < a.dim(); ++i) det *= a.at(i, i);
  return det;
}

CMatrix inverse(const CMatrix& m) {
  const int d = m.dim();
  CMatrix a = m;
  std::vector<int> perm;
  int sign = 1;
  if (!lu_decompose(a, perm, sign)) {
    throw SingularMatrixError("inverse: matrix is singular to working precision");
  }
  CMatrix out(d);
  std::vector<C> col(d), y(d);
  for (int rhs = 0; rhs < d; ++rhs) {
    for (int i = 0; i < d; ++i) col[i] = (perm[i] == rhs) ? C{1.0, 0.0} : C{0.0, 0.0};
    for (int i = 0; i < d; ++i) {  // forward: L y = P e
      C s = col[i];
      for (int j = 0; j < i; ++j) s -= a.at(i, j) * y[j];
      y[i] = s;
    }
    for (int i = d - 1; i >= 0; --i) {  // back: U x = y
      C s = y[i];
      for (int j = i + 1; j < d; ++j) s -= a.at(i, j) * out.at(j, rhs);
      out.at(i, rhs) = s / a.at(i, i);
    }
  }
  return out;
}

std::vector<double> singular_values(const CMatrix& m) {
  const int d = m.dim();
  CMatrix a = m;  // columns get orthogonalized in place
  const double scale = std::max(a.frobenius_norm(), 1e-300);
  const double tol = 1e-13;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        C apq{};
        double app = 0.0, aqq = 0.0;
        for (int i = 0; i < d; ++i) {
          const C x = a.at(i, p), y = a.at(i, q);
          app += std::norm(x);
          aqq += std::norm(y);
          apq += std::conj(x) * y;
        }
        const double off = std::abs(apq);
        if (off <= tol * std::sqrt(app * aqq) + 1e-300) continue;
        rotated = true;
        // factor the coupling phase into column q so the Gram block
        // [[app, |apq|],[|apq|, aqq]] becomes real, then rotate
        const C phase = apq / off;
        const double tau = (aqq - app) / (2.0 * off);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < d; ++i) {
          const C x = a.at(i, p);
          const C y = std::conj(phase) * a.at(i, q);
          a.at(i, p) = c * x - s * y;
          a.at(i, q) = phase * (s * x + c * y);
        }
      }
    }
    if (!rotated) break;
    if (sweep == max_sweeps - 1) {
      throw ConvergenceError("singular_values: Jacobi sweeps did not converge", scale);
    }
  }
  std::vector<double> sv(d);
  for (int j = 0; j < d; ++j) {
    // scale per column: squared norms of very small columns would underflow
    double big = 0.0;
    for (int i = 0; i < d; ++i) big = std::max(big, std::abs(a.at(i, j)));
    if (big == 0.0) {
      sv[j] = 0.0;
      continue;
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::norm(a.at(i, j) / big);
    sv[j] = big * std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

double operator_norm(const CMatrix& m) { return singular_values(m).front(); }

QrResult qr_positive(const CMatrix& m) {
  const int d = m.dim();
  CMatrix r = m;
  CMatrix q = CMatrix::identity(d);
  std::vector<C> v(d);
  for (int k = 0; k < d - 1; ++k) {
    double xnorm = 0.0;
    for (int i = k; i < d; ++i) xnorm += std::norm(r.at(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const C x0 = r.at(k, k);
    const double ax0 = std::abs(x0);
    const C phase = (ax0 > 0.0) ? x0 / ax0 : C{1.0, 0.0};
    // v = x + phase*|x| e_k ; reflector H = I - 2 v v^H / (v^H v)
    double vnorm2 = 0.0;
    for (int i = k; i < d; ++i) {
      v[i] = r.at(i, k);
      if (i == k) v[i] += phase * xnorm;
      vnorm2 += std::norm(v[i]);
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    for (int j = k; j < d; ++j) {  // R <- H R
      C s{};
      for (int i = k; i < d; ++i) s += std::conj(v[i]) * r.at(i, j);
      s *= beta;
      for (int i = k; i < d; ++i) r.at(i, j) -= s * v[i];
    }
    for (int j = 0; j < d; ++j) {  // Q <- Q H
      C s{};
      for (int i = k; i < d; ++i) s += q.at(j, i) * v[i];
      s *= beta;
      for (int i = k; i < d; ++i) q.at(j, i) -= s * std::conj(v[i]);
    }
  }
  for (int i = 0; i < d; ++i) {  // zero the subdiagonal noise
    for (int j = 0; j < i; ++j) r.at(i, j) = C{};
  }
  for (int i = 0; i < d; ++i) {  // make the diagonal real and nonnegative
    const C rii = r.at(i, i);
    const double arii = std::abs(rii);
    if (arii == 0.0) continue;
    const C ph = rii / arii;
    const C phc = std::conj(ph);
    for (int j = i + 1; j < d; ++j) r.at(i, j) *= phc;
    r.at(i, i) = arii;  // exactly real
    for (int j = 0; j < d; ++j) q.at(j, i) *= ph;
  }
  return {std::move(q), std::move(r)};
}

}  // namespace lorenzlab
