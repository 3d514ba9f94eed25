#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace rubato {

// Fixed-size 2-vector / 2x2 matrix algebra, closed form throughout.
// The whole model lives in R^2, so nothing heavier is needed.

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

struct Mat2 {
  // row-major: [[a, b], [c, d]]
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }

  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }

  Mat2 transpose() const { return {a, c, b, d}; }
  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }

  Mat2 symmetrized() const {
    double off = 0.5 * (b + c);
    return {a, off, off, d};
  }
};

inline bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline bool finite(const Mat2& m) {
  return std::isfinite(m.a) && std::isfinite(m.b) && std::isfinite(m.c) && std::isfinite(m.d);
}

// Eigendecomposition of a symmetric 2x2: returns eigenvalues (lo, hi) and the
// rotation angle of the eigenbasis.
struct SymEig2 {
  double lo, hi;      // eigenvalues, lo <= hi
  double cs, sn;      // eigenvector of hi is (cs, sn)
};

inline SymEig2 sym_eig(const Mat2& m) {
  double a = m.a, b = 0.5 * (m.b + m.c), d = m.d;
  double tr = a + d;
  double gap = std::hypot(a - d, 2.0 * b);
  SymEig2 e;
  e.lo = 0.5 * (tr - gap);
  e.hi = 0.5 * (tr + gap);
  if (gap <= 0.0) {
    e.cs = 1.0;
    e.sn = 0.0;
  } else {
    // (a - lo, b) is an eigenvector for hi when b != 0
    double vx = a - e.lo, vy = b;
    double n = std::hypot(vx, vy);
    if (n == 0.0) { vx = 1.0; vy = 0.0; n = 1.0; }
    e.cs = vx / n;
    e.sn = vy / n;
  }
  return e;
}

// Moore-Penrose pseudo-inverse of a symmetric PSD 2x2 with a relative
// eigenvalue cutoff.
inline Mat2 sym_pinv(const Mat2& m, double rel_cutoff = 1e-10) {
  SymEig2 e = sym_eig(m.symmetrized());
  double cut = rel_cutoff * std::max(std::abs(e.hi), std::abs(e.lo));
  double ihi = (std::abs(e.hi) > cut && e.hi != 0.0) ? 1.0 / e.hi : 0.0;
  double ilo = (std::abs(e.lo) > cut && e.lo != 0.0) ? 1.0 / e.lo : 0.0;
  // eigenvector of lo is (-sn, cs)
  double c = e.cs, s = e.sn;
  return {ihi * c * c + ilo * s * s, ihi * c * s - ilo * s * c,
          ihi * s * c - ilo * c * s, ihi * s * s + ilo * c * c};
}

// Lower-triangular factor L with L L^T = m for symmetric PSD m, tolerating
// rank deficiency (zero pivots).
inline Mat2 psd_chol(const Mat2& m) {
  Mat2 s = m.symmetrized();
  double l11 = s.a > 0.0 ? std::sqrt(s.a) : 0.0;
  double l21 = l11 > 0.0 ? s.c / l11 : 0.0;
  double rem = s.d - l21 * l21;
  double l22 = rem > 0.0 ? std::sqrt(rem) : 0.0;
  return {l11, 0.0, l21, l22};
}

}  // namespace rubato
