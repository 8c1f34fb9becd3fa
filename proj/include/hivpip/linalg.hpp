// linalg.hpp
//
// Fixed-size 4-vector / 4x4-matrix arithmetic and small dense solves.
// Everything in this project is a four-state system, so the linear
// algebra stays on the stack.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hivpip {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;

class SingularMatrixError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Vec4 operator-(const Vec4& a, const Vec4& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline Vec4 operator*(double s, const Vec4& v) {
  return {s * v[0], s * v[1], s * v[2], s * v[3]};
}

inline Vec4& operator+=(Vec4& a, const Vec4& b) {
  for (int i = 0; i < 4; ++i) a[i] += b[i];
  return a;
}

inline double inf_norm(const Vec4& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline Vec4 matvec(const Mat4& m, const Vec4& v) {
  Vec4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i] += m[i][j] * v[j];
  return r;
}

// I + s*J
inline Mat4 identity_plus_scaled(const Mat4& j, double s) {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) m[i][k] = s * j[i][k];
    m[i][i] += 1.0;
  }
  return m;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
Vec4 solve4(Mat4 a, Vec4 b);

// Row-major n x n solve, used for the polynomial-fit normal equations.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                std::size_t n);

}  // namespace hivpip
