// Dense exact linear algebra over rationals, plus the integer-lattice
// utilities (extended gcd, Smith form, unimodular completions) and a small
// Fourier-Motzkin feasibility test for cone face checks.  Matrices here are
// tiny (Cech components, fiber dimensions), so simplicity wins over blocking.
#pragma once

#include "toric/rational.hpp"

#include <cassert>
#include <optional>
#include <utility>

namespace toric {

class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(size_t r, size_t c) : rows_(r), cols_(c), a_(r * c, Rat(0)) {}

  static Mat identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  Rat& at(size_t i, size_t j) { return a_[i * cols_ + j]; }
  const Rat& at(size_t i, size_t j) const { return a_[i * cols_ + j]; }

  bool operator==(const Mat& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }

  Mat operator*(const Mat& o) const {
    assert(cols_ == o.rows_);
    Mat r(rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t k = 0; k < cols_; ++k) {
        const Rat& x = at(i, k);
        if (x == 0) continue;
        for (size_t j = 0; j < o.cols_; ++j)
          if (o.at(k, j) != 0) r.at(i, j) += x * o.at(k, j);
      }
    return r;
  }

  Mat operator+(const Mat& o) const {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    Mat r = *this;
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
    return r;
  }

  Mat operator-(const Mat& o) const {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    Mat r = *this;
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
    return r;
  }

  Mat scaled(const Rat& c) const {
    Mat r = *this;
    for (auto& x : r.a_) x *= c;
    return r;
  }

  Mat transposed() const {
    Mat r(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  bool is_zero() const {
    for (const auto& x : a_) if (x != 0) return false;
    return true;
  }

  std::vector<Rat> apply(const std::vector<Rat>& v) const {
    assert(v.size() == cols_);
    std::vector<Rat> r(rows_, Rat(0));
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j)
        if (at(i, j) != 0 && v[j] != 0) r[i] += at(i, j) * v[j];
    return r;
  }

  Mat hstack(const Mat& o) const {
    assert(rows_ == o.rows_);
    Mat r(rows_, cols_ + o.cols_);
    for (size_t i = 0; i < rows_; ++i) {
      for (size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
      for (size_t j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
    }
    return r;
  }

  Mat columns(const std::vector<size_t>& idx) const {
    Mat r(rows_, idx.size());
    for (size_t j = 0; j < idx.size(); ++j)
      for (size_t i = 0; i < rows_; ++i) r.at(i, j) = at(i, idx[j]);
    return r;
  }

  // Fraction-free rank: rows are cleared to integers, then Bareiss
  // elimination over BigInt.  No intermediate rounding anywhere.
  size_t rank() const {
    if (rows_ == 0 || cols_ == 0) return 0;
    std::vector<std::vector<BigInt>> m(rows_, std::vector<BigInt>(cols_));
    for (size_t i = 0; i < rows_; ++i) {
      BigInt l = 1;
      for (size_t j = 0; j < cols_; ++j) l = boost::multiprecision::lcm(l, denominator(at(i, j)));
      for (size_t j = 0; j < cols_; ++j)
        m[i][j] = numerator(at(i, j)) * (l / denominator(at(i, j)));
    }
    size_t r = 0;
    BigInt prev = 1;
    for (size_t c = 0; c < cols_ && r < rows_; ++c) {
      size_t p = r;
      while (p < rows_ && m[p][c] == 0) ++p;
      if (p == rows_) continue;
      std::swap(m[p], m[r]);
      for (size_t i = r + 1; i < rows_; ++i) {
        for (size_t j = c + 1; j < cols_; ++j)
          m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) / prev;
        m[i][c] = 0;
      }
      prev = m[r][c];
      ++r;
    }
    return r;
  }

  // Reduced row echelon form; records pivot column indices if requested.
  Mat rref(std::vector<size_t>* pivots = nullptr) const {
    Mat m = *this;
    size_t r = 0;
    std::vector<size_t> piv;
    for (size_t c = 0; c < cols_ && r < rows_; ++c) {
      size_t p = r;
      while (p < rows_ && m.at(p, c) == 0) ++p;
      if (p == rows_) continue;
      for (size_t j = 0; j < cols_; ++j) std::swap(m.at(p, j), m.at(r, j));
      Rat inv = Rat(1) / m.at(r, c);
      for (size_t j = c; j < cols_; ++j) m.at(r, j) *= inv;
      for (size_t i = 0; i < rows_; ++i) {
        if (i == r || m.at(i, c) == 0) continue;
        Rat f = m.at(i, c);
        for (size_t j = c; j < cols_; ++j) m.at(i, j) -= f * m.at(r, j);
      }
      piv.push_back(c);
      ++r;
    }
    if (pivots) *pivots = piv;
    return m;
  }

  // One solution of A x = b, or nullopt if inconsistent.
  std::optional<std::vector<Rat>> solve(const std::vector<Rat>& b) const {
    assert(b.size() == rows_);
    Mat aug(rows_, cols_ + 1);
    for (size_t i = 0; i < rows_; ++i) {
      for (size_t j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
      aug.at(i, cols_) = b[i];
    }
    std::vector<size_t> piv;
    Mat r = aug.rref(&piv);
    for (size_t c : piv)
      if (c == cols_) return std::nullopt;
    std::vector<Rat> x(cols_, Rat(0));
    for (size_t i = 0; i < piv.size(); ++i) x[piv[i]] = r.at(i, cols_);
    return x;
  }

  // Columns form a basis of ker(A).
  Mat nullspace() const {
    std::vector<size_t> piv;
    Mat r = rref(&piv);
    std::vector<bool> is_piv(cols_, false);
    for (size_t c : piv) is_piv[c] = true;
    std::vector<size_t> free_cols;
    for (size_t c = 0; c < cols_; ++c)
      if (!is_piv[c]) free_cols.push_back(c);
    Mat k(cols_, free_cols.size());
    for (size_t f = 0; f < free_cols.size(); ++f) {
      size_t fc = free_cols[f];
      k.at(fc, f) = 1;
      for (size_t i = 0; i < piv.size(); ++i) k.at(piv[i], f) = -r.at(i, fc);
    }
    return k;
  }

  Rat det() const {
    assert(rows_ == cols_);
    Mat m = *this;
    Rat d = 1;
    for (size_t c = 0; c < cols_; ++c) {
      size_t p = c;
      while (p < rows_ && m.at(p, c) == 0) ++p;
      if (p == rows_) return Rat(0);
      if (p != c) {
        for (size_t j = 0; j < cols_; ++j) std::swap(m.at(p, j), m.at(c, j));
        d = -d;
      }
      d *= m.at(c, c);
      Rat inv = Rat(1) / m.at(c, c);
      for (size_t i = c + 1; i < rows_; ++i) {
        if (m.at(i, c) == 0) continue;
        Rat f = m.at(i, c) * inv;
        for (size_t j = c; j < cols_; ++j) m.at(i, j) -= f * m.at(c, j);
      }
    }
    return d;
  }

  static Mat kron(const Mat& a, const Mat& b) {
    Mat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (size_t i = 0; i < a.rows(); ++i)
      for (size_t j = 0; j < a.cols(); ++j) {
        if (a.at(i, j) == 0) continue;
        for (size_t k = 0; k < b.rows(); ++k)
          for (size_t l = 0; l < b.cols(); ++l)
            r.at(i * b.rows() + k, j * b.cols() + l) = a.at(i, j) * b.at(k, l);
      }
    return r;
  }

 private:
  size_t rows_, cols_;
  std::vector<Rat> a_;
};

// ---------------------------------------------------------------------------
// Subspaces of Q^n, stored as reduced-column-echelon basis matrices.  The
// canonical form makes structural equality meaningful and gives O(1)
// coordinate extraction at the pivot rows.

struct Subspace {
  Mat basis;                  // n x k, reduced column echelon
  std::vector<size_t> pivot_rows;

  size_t dim() const { return basis.cols(); }
  size_t ambient() const { return basis.rows(); }
  bool operator==(const Subspace& o) const { return basis == o.basis; }
};

inline Subspace make_subspace(const Mat& spanning_cols) {
  std::vector<size_t> piv;
  Mat r = spanning_cols.transposed().rref(&piv).transposed();
  Mat b = r.columns([&] {
    std::vector<size_t> idx(piv.size());
    for (size_t i = 0; i < piv.size(); ++i) idx[i] = i;
    return idx;
  }());
  return Subspace{b, piv};
}

inline Subspace full_space(size_t n) { return make_subspace(Mat::identity(n)); }
inline Subspace zero_space(size_t n) { return Subspace{Mat(n, 0), {}}; }

inline Subspace subspace_sum(const Subspace& a, const Subspace& b) {
  return make_subspace(a.basis.hstack(b.basis));
}

inline Subspace subspace_intersection(const Subspace& a, const Subspace& b) {
  if (a.dim() == 0 || b.dim() == 0) return zero_space(a.ambient());
  Mat j = a.basis.hstack(b.basis.scaled(Rat(-1)));
  Mat k = j.nullspace();             // columns (y; z) with A y = B z
  Mat y(a.dim(), k.cols());
  for (size_t i = 0; i < a.dim(); ++i)
    for (size_t c = 0; c < k.cols(); ++c) y.at(i, c) = k.at(i, c);
  return make_subspace(a.basis * y);
}

// { phi in (Q^n)^* : phi(S) = 0 }, as a subspace of Q^n via the dual basis.
inline Subspace annihilator(const Subspace& s) {
  return make_subspace(s.basis.transposed().nullspace());
}

inline bool subspace_contains(const Subspace& big, const Mat& cols) {
  if (cols.cols() == 0) return true;
  Mat stacked = big.basis.hstack(cols);
  return stacked.rank() == big.dim();
}

inline bool subspace_leq(const Subspace& small, const Subspace& big) {
  return subspace_contains(big, small.basis);
}

// Coordinates of v (a member of the span) w.r.t. the canonical basis: just
// the entries at the pivot rows.  Caller must know v lies in the span.
inline std::vector<Rat> subspace_coords(const Subspace& s, const std::vector<Rat>& v) {
  std::vector<Rat> c(s.dim());
  for (size_t j = 0; j < s.dim(); ++j) c[j] = v[s.pivot_rows[j]];
  return c;
}

// ---------------------------------------------------------------------------
// Integer lattice utilities.

struct ExtGcd { Int g, x, y; };  // g = gcd(a,b) = a*x + b*y

inline ExtGcd ext_gcd(Int a, Int b) {
  if (b == 0) return {a < 0 ? -a : a, a < 0 ? -1 : 1, 0};
  ExtGcd e = ext_gcd(b, a % b);
  return {e.g, e.y, e.x - (a / b) * e.y};
}

using IntMat = std::vector<Vec>;  // row-major

inline IntMat int_identity(size_t n) {
  IntMat m(n, Vec(n, 0));
  for (size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline IntMat int_mul(const IntMat& a, const IntMat& b) {
  size_t n = a.size(), k = b.size(), c = k ? b[0].size() : 0;
  IntMat r(n, Vec(c, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j)
      if (a[i][j] != 0)
        for (size_t l = 0; l < c; ++l) r[i][l] += a[i][j] * b[j][l];
  return r;
}

// Unimodular U with U * v = gcd(v) * e1.  Used for lattice quotients: the
// rows 2..n of U present Z^n / Z v, and row 1 of U^{-1}-dual style pairing
// gives a functional w with <w, v> = gcd(v).
inline IntMat unimodular_to_e1(const Vec& v) {
  size_t n = v.size();
  IntMat u = int_identity(n);
  Vec w = v;
  // chain of 2x2 unimodular moves folding every entry into slot 0
  for (size_t i = 1; i < n; ++i) {
    if (w[i] == 0) continue;
    ExtGcd e = ext_gcd(w[0], w[i]);
    Int a = w[0] / e.g, b = w[i] / e.g;
    Vec r0 = u[0], ri = u[i];
    for (size_t j = 0; j < n; ++j) {
      u[0][j] = e.x * r0[j] + e.y * ri[j];
      u[i][j] = -b * r0[j] + a * ri[j];
    }
    w[0] = e.g;
    w[i] = 0;
  }
  if (w[0] < 0) {
    for (size_t j = 0; j < n; ++j) u[0][j] = -u[0][j];
  }
  return u;
}

// Smith normal form with the left transform only: returns diagonal entries
// d (nonnegative) and U in GL(n, Z) such that U * A * (some V) is diagonal.
// Enough to compute coordinates in coker(A).
struct SmithLeft {
  std::vector<Int> diag;
  IntMat left;  // n x n unimodular
};

inline SmithLeft smith_left(IntMat a) {
  size_t n = a.size(), k = n ? a[0].size() : 0;
  IntMat u = int_identity(n);
  size_t t = 0;
  auto row_op = [&](size_t i, size_t j, Int f) {  // row_i -= f * row_j
    for (size_t c = 0; c < k; ++c) a[i][c] -= f * a[j][c];
    for (size_t c = 0; c < n; ++c) u[i][c] -= f * u[j][c];
  };
  auto row_swap = [&](size_t i, size_t j) {
    std::swap(a[i], a[j]);
    std::swap(u[i], u[j]);
  };
  auto col_op = [&](size_t i, size_t j, Int f) {  // col_i -= f * col_j
    for (size_t r = 0; r < n; ++r) a[r][i] -= f * a[r][j];
  };
  std::vector<Int> diag;
  while (t < n && t < k) {
    // find a nonzero pivot in the remaining block
    size_t pi = t, pj = t;
    bool found = false;
    for (size_t i = t; i < n && !found; ++i)
      for (size_t j = t; j < k && !found; ++j)
        if (a[i][j] != 0) { pi = i; pj = j; found = true; }
    if (!found) break;
    row_swap(t, pi);
    for (size_t r = 0; r < n; ++r) std::swap(a[r][t], a[r][pj]);
    // reduce until pivot divides everything in its row and column
    bool again = true;
    while (again) {
      again = false;
      for (size_t i = t + 1; i < n; ++i)
        if (a[i][t] != 0) {
          Int q = a[i][t] / a[t][t];
          row_op(i, t, q);
          if (a[i][t] != 0) { row_swap(t, i); again = true; }
        }
      for (size_t j = t + 1; j < k; ++j)
        if (a[t][j] != 0) {
          Int q = a[t][j] / a[t][t];
          col_op(j, t, q);
          if (a[t][j] != 0) {
            for (size_t r = 0; r < n; ++r) std::swap(a[r][t], a[r][j]);
            again = true;
          }
        }
    }
    if (a[t][t] < 0) {
      for (size_t c = 0; c < k; ++c) a[t][c] = -a[t][c];
      for (size_t c = 0; c < n; ++c) u[t][c] = -u[t][c];
    }
    diag.push_back(a[t][t]);
    ++t;
  }
  return {diag, u};
}

// ---------------------------------------------------------------------------
// Fourier-Motzkin feasibility for systems  c . x + b >= 0  over Q.
// Strict constraints are encoded by the caller via ">= 1" after scaling.

struct LinIneq {
  std::vector<Rat> c;
  Rat b;
};

inline bool fm_feasible(std::vector<LinIneq> sys, size_t nvars) {
  for (size_t v = nvars; v-- > 0;) {
    std::vector<LinIneq> pos, neg, zero;
    for (auto& q : sys) {
      if (q.c[v] > 0) pos.push_back(q);
      else if (q.c[v] < 0) neg.push_back(q);
      else zero.push_back(q);
    }
    std::vector<LinIneq> next = std::move(zero);
    for (const auto& p : pos)
      for (const auto& n : neg) {
        // eliminate x_v from p.c[v] > 0, n.c[v] < 0
        Rat a = p.c[v], d = -n.c[v];
        LinIneq q;
        q.c.resize(nvars, Rat(0));
        for (size_t j = 0; j < nvars; ++j) q.c[j] = d * p.c[j] + a * n.c[j];
        q.b = d * p.b + a * n.b;
        next.push_back(std::move(q));
      }
    sys = std::move(next);
  }
  for (const auto& q : sys)
    if (q.b < 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Characteristic polynomial (Faddeev-LeVerrier) and discriminant.

// Returns monic coefficients c so that p(t) = t^r + c[r-1] t^{r-1} + ... + c[0].
inline std::vector<Rat> char_poly(const Mat& a) {
  size_t r = a.rows();
  assert(a.cols() == r);
  std::vector<Rat> c(r, Rat(0));
  Mat m = Mat::identity(r);
  for (size_t k = 1; k <= r; ++k) {
    Mat n = a * m;
    Rat tr = 0;
    for (size_t i = 0; i < r; ++i) tr += n.at(i, i);
    Rat ck = -tr / Rat(static_cast<long long>(k));
    c[r - k] = ck;
    m = n;
    for (size_t i = 0; i < r; ++i) m.at(i, i) += ck;
  }
  return c;
}

// Resultant of two polynomials (coefficient vectors, lowest degree first is
// NOT used here: we pass highest-first monic-style vectors).
inline Rat resultant(const std::vector<Rat>& p, const std::vector<Rat>& q) {
  size_t dp = p.size() - 1, dq = q.size() - 1;
  if (dp == 0 || dq == 0) {
    // deg 0 cases: res(c, q) = c^{deg q}
    Rat r = 1;
    if (dp == 0) for (size_t i = 0; i < dq; ++i) r *= p[0];
    else for (size_t i = 0; i < dp; ++i) r *= q[0];
    return r;
  }
  size_t n = dp + dq;
  Mat s(n, n);
  for (size_t i = 0; i < dq; ++i)
    for (size_t j = 0; j <= dp; ++j) s.at(i, i + j) = p[j];
  for (size_t i = 0; i < dp; ++i)
    for (size_t j = 0; j <= dq; ++j) s.at(dq + i, i + j) = q[j];
  return s.det();
}

// Discriminant of a monic polynomial given by char_poly-style coefficients.
inline Rat discriminant(const std::vector<Rat>& low_coeffs) {
  size_t r = low_coeffs.size();
  if (r <= 1) return Rat(1);
  // highest-first vectors for the Sylvester matrix
  std::vector<Rat> p(r + 1);
  p[0] = 1;
  for (size_t i = 0; i < r; ++i) p[1 + i] = low_coeffs[r - 1 - i];
  std::vector<Rat> dp(r);
  for (size_t i = 0; i <= r - 1; ++i)
    dp[i] = p[i] * Rat(static_cast<long long>(r - i));
  Rat res = resultant(p, dp);
  Rat sign = ((r * (r - 1) / 2) % 2 == 0) ? Rat(1) : Rat(-1);
  return sign * res;
}

}  // namespace toric
