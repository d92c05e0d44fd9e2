#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "errors.hpp"

// Fixed-size 3x3 tensor algebra plus the fourth-order machinery used by the
// consistent tangent. Everything is a value type; no allocation anywhere.

namespace viscostep {

template <class T = double>
struct Tensor2 {
  std::array<T, 9> v{};  // row-major

  constexpr T& operator()(int i, int j) { return v[3 * i + j]; }
  constexpr const T& operator()(int i, int j) const { return v[3 * i + j]; }

  static constexpr Tensor2 zero() { return Tensor2{}; }

  static constexpr Tensor2 identity() {
    Tensor2 a;
    a.v = {T(1), T(0), T(0), T(0), T(1), T(0), T(0), T(0), T(1)};
    return a;
  }

  static constexpr Tensor2 diag(T a, T b, T c) {
    Tensor2 d;
    d(0, 0) = a;
    d(1, 1) = b;
    d(2, 2) = c;
    return d;
  }

  Tensor2& operator+=(const Tensor2& b) {
    for (int i = 0; i < 9; ++i) v[i] += b.v[i];
    return *this;
  }
  Tensor2& operator-=(const Tensor2& b) {
    for (int i = 0; i < 9; ++i) v[i] -= b.v[i];
    return *this;
  }
  Tensor2& operator*=(T s) {
    for (int i = 0; i < 9; ++i) v[i] *= s;
    return *this;
  }

  friend Tensor2 operator+(Tensor2 a, const Tensor2& b) { return a += b; }
  friend Tensor2 operator-(Tensor2 a, const Tensor2& b) { return a -= b; }
  friend Tensor2 operator*(T s, Tensor2 a) { return a *= s; }
  friend Tensor2 operator*(Tensor2 a, T s) { return a *= s; }
  friend Tensor2 operator/(Tensor2 a, T s) { return a *= T(1) / s; }
  friend Tensor2 operator-(Tensor2 a) { return a *= T(-1); }

  // matrix product
  friend Tensor2 operator*(const Tensor2& a, const Tensor2& b) {
    Tensor2 c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        T s = 0;
        for (int p = 0; p < 3; ++p) s += a(i, p) * b(p, j);
        c(i, j) = s;
      }
    return c;
  }

  friend bool operator==(const Tensor2& a, const Tensor2& b) { return a.v == b.v; }
};

template <class T>
Tensor2<T> transpose(const Tensor2<T>& a) {
  Tensor2<T> b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = a(j, i);
  return b;
}

template <class T>
Tensor2<T> symmetrize(const Tensor2<T>& a) {
  Tensor2<T> b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (a(i, j) + a(j, i)) / T(2);
  return b;
}

template <class T>
T trace(const Tensor2<T>& a) {
  return a(0, 0) + a(1, 1) + a(2, 2);
}

template <class T>
Tensor2<T> dev(const Tensor2<T>& a) {
  Tensor2<T> b = a;
  const T m = trace(a) / T(3);
  b(0, 0) -= m;
  b(1, 1) -= m;
  b(2, 2) -= m;
  return b;
}

template <class T>
T det(const Tensor2<T>& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// A : B = A_ij B_ij
template <class T>
T ddot(const Tensor2<T>& a, const Tensor2<T>& b) {
  T s = 0;
  for (int i = 0; i < 9; ++i) s += a.v[i] * b.v[i];
  return s;
}

template <class T>
T norm(const Tensor2<T>& a) {
  using std::sqrt;
  return sqrt(ddot(a, a));
}

template <class T>
Tensor2<T> inv(const Tensor2<T>& a) {
  const T d = det(a);
  if (!(std::abs(d) > T(0))) throw SingularTensor("inv: zero determinant");
  Tensor2<T> b;  // adjugate / det
  b(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
  b(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
  b(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
  b(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
  b(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
  b(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
  b(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
  b(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
  b(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  return b;
}

// (det A)^(-1/3) A, defined for det A > 0 only.
template <class T>
Tensor2<T> unimodular(const Tensor2<T>& a) {
  const T d = det(a);
  if (!(d > T(0))) throw NonPositiveDeterminant("unimodular: det <= 0");
  using std::cbrt;
  return a * (T(1) / cbrt(d));
}

// Symmetry + Sylvester criterion on the leading principal minors.
template <class T>
bool is_spd(const Tensor2<T>& a, T sym_tol = T(1e-9)) {
  const T scale = norm(a);
  if (norm(a - transpose(a)) > sym_tol * scale + T(1e-14)) return false;
  const T m1 = a(0, 0);
  const T m2 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const T m3 = det(a);
  return m1 > T(0) && m2 > T(0) && m3 > T(0);
}

template <class T>
void require_spd(const Tensor2<T>& a, const char* what) {
  if (!is_spd(a)) throw NotSpd(std::string(what) + ": not symmetric positive definite");
}

// Eigendecomposition of a symmetric 3x3 by cyclic Jacobi rotations.
// Returns eigenvalues in w and the rotation matrix V (columns = eigenvectors).
template <class T>
void jacobi_eig(const Tensor2<T>& a, std::array<T, 3>& w, Tensor2<T>& V) {
  Tensor2<T> A = symmetrize(a);
  V = Tensor2<T>::identity();
  for (int sweep = 0; sweep < 50; ++sweep) {
    T off = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
    if (off < std::numeric_limits<T>::epsilon() * std::numeric_limits<T>::epsilon()) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (A(p, q) == T(0)) continue;
        const T theta = (A(q, q) - A(p, p)) / (T(2) * A(p, q));
        const T t = (theta >= T(0) ? T(1) : T(-1)) /
                    (std::abs(theta) + std::sqrt(theta * theta + T(1)));
        const T c = T(1) / std::sqrt(t * t + T(1));
        const T s = t * c;
        Tensor2<T> G = Tensor2<T>::identity();
        G(p, p) = c;
        G(q, q) = c;
        G(p, q) = s;
        G(q, p) = -s;
        A = transpose(G) * A * G;
        A = symmetrize(A);
        V = V * G;
      }
  }
  w = {A(0, 0), A(1, 1), A(2, 2)};
}

// SPD square root via Jacobi eigendecomposition.
template <class T>
Tensor2<T> sqrt_spd(const Tensor2<T>& a) {
  require_spd(a, "sqrt_spd");
  std::array<T, 3> w;
  Tensor2<T> V;
  jacobi_eig(a, w, V);
  Tensor2<T> D;
  for (int i = 0; i < 3; ++i) {
    if (!(w[i] > T(0))) throw NotSpd("sqrt_spd: non-positive eigenvalue");
    D(i, i) = std::sqrt(w[i]);
  }
  return V * D * transpose(V);
}

template <class T>
T smallest_eigenvalue_sym(const Tensor2<T>& a) {
  std::array<T, 3> w;
  Tensor2<T> V;
  jacobi_eig(a, w, V);
  T m = w[0];
  if (w[1] < m) m = w[1];
  if (w[2] < m) m = w[2];
  return m;
}

// Matrix exponential: scaling and squaring with a [6/6] Pade approximant.
// Arguments in this code are small deviators, but the routine is general.
template <class T>
Tensor2<T> expm(const Tensor2<T>& a) {
  const T nrm = norm(a);
  int squarings = 0;
  T scale = T(1);
  if (nrm > T(0.5)) {
    const double s = std::ceil(std::log2(static_cast<double>(nrm) / 0.5));
    squarings = static_cast<int>(s);
    if (squarings < 0) squarings = 0;
    if (squarings > 60) squarings = 60;
    scale = T(1) / T(std::pow(2.0, squarings));
  }
  const Tensor2<T> A = a * scale;

  // Pade(6,6) coefficients: c_k = 6!(12-k)! / (12! k! (6-k)!)
  const T c[7] = {T(1),          T(0.5),         T(5) / T(44),  T(1) / T(66),
                  T(1) / T(792), T(1) / T(15840), T(1) / T(665280)};
  const Tensor2<T> I = Tensor2<T>::identity();
  Tensor2<T> Ak = I;
  Tensor2<T> N = I * c[0];
  Tensor2<T> D = I * c[0];
  T sign = T(-1);
  for (int k = 1; k <= 6; ++k) {
    Ak = Ak * A;
    N += Ak * c[k];
    D += Ak * (sign * c[k]);
    sign = -sign;
  }
  Tensor2<T> E = inv(D) * N;
  for (int i = 0; i < squarings; ++i) E = E * E;
  return E;
}

// ---------------------------------------------------------------------------
// Fourth-order tensors. Conventions (fixed by the tangent derivation):
//   (A (x) B) : X = A tr(BX)        -> (A(x)B)_ijkl = A_ij B_lk
//   (A (o) B) : X = A X B           -> (A(o)B)_ijkl = A_ik B_lj
//   II : X = X                      -> II_ijkl = d_ik d_jl
//   PP = II - (1/3) 1 (x) 1         (deviatoric projector)
//   (S : T)_ijkl = S_ijpq T_pqkl    (composition)
//   (A . T)_ijkl = A_ip T_pjkl      so (A . T) : X = A (T : X)
//   (T . A)_ijkl = T_ipkl A_pj      so (II . A) : X = X A
// ---------------------------------------------------------------------------

template <class T = double>
struct Tensor4 {
  std::array<T, 81> v{};

  static constexpr std::size_t idx(int i, int j, int k, int l) {
    return static_cast<std::size_t>(((i * 3 + j) * 3 + k) * 3 + l);
  }
  constexpr T& operator()(int i, int j, int k, int l) { return v[idx(i, j, k, l)]; }
  constexpr const T& operator()(int i, int j, int k, int l) const { return v[idx(i, j, k, l)]; }

  static Tensor4 zero() { return Tensor4{}; }

  static Tensor4 identity() {
    Tensor4 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t(i, j, i, j) = T(1);
    return t;
  }

  // A (x) B
  static Tensor4 dyad(const Tensor2<T>& a, const Tensor2<T>& b) {
    Tensor4 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) t(i, j, k, l) = a(i, j) * b(l, k);
    return t;
  }

  // A (o) B
  static Tensor4 square(const Tensor2<T>& a, const Tensor2<T>& b) {
    Tensor4 t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) t(i, j, k, l) = a(i, k) * b(l, j);
    return t;
  }

  static Tensor4 dev_projector() {
    const Tensor2<T> I2 = Tensor2<T>::identity();
    return identity() - dyad(I2, I2) * (T(1) / T(3));
  }

  Tensor4& operator+=(const Tensor4& b) {
    for (std::size_t i = 0; i < 81; ++i) v[i] += b.v[i];
    return *this;
  }
  Tensor4& operator-=(const Tensor4& b) {
    for (std::size_t i = 0; i < 81; ++i) v[i] -= b.v[i];
    return *this;
  }
  Tensor4& operator*=(T s) {
    for (std::size_t i = 0; i < 81; ++i) v[i] *= s;
    return *this;
  }
  friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
  friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
  friend Tensor4 operator*(Tensor4 a, T s) { return a *= s; }
  friend Tensor4 operator*(T s, Tensor4 a) { return a *= s; }
};

// T : X
template <class T>
Tensor2<T> contract(const Tensor4<T>& t, const Tensor2<T>& x) {
  Tensor2<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      T s = 0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += t(i, j, k, l) * x(k, l);
      r(i, j) = s;
    }
  return r;
}

// S : T (composition)
template <class T>
Tensor4<T> compose(const Tensor4<T>& s, const Tensor4<T>& t) {
  Tensor4<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          T acc = 0;
          for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) acc += s(i, j, p, q) * t(p, q, k, l);
          r(i, j, k, l) = acc;
        }
  return r;
}

// A . T
template <class T>
Tensor4<T> premul(const Tensor2<T>& a, const Tensor4<T>& t) {
  Tensor4<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          T acc = 0;
          for (int p = 0; p < 3; ++p) acc += a(i, p) * t(p, j, k, l);
          r(i, j, k, l) = acc;
        }
  return r;
}

// T . A
template <class T>
Tensor4<T> postmul(const Tensor4<T>& t, const Tensor2<T>& a) {
  Tensor4<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          T acc = 0;
          for (int p = 0; p < 3; ++p) acc += t(i, p, k, l) * a(p, j);
          r(i, j, k, l) = acc;
        }
  return r;
}

// X : T : Y
template <class T>
T bilinear(const Tensor2<T>& x, const Tensor4<T>& t, const Tensor2<T>& y) {
  return ddot(x, contract(t, y));
}

template <class T>
T norm4(const Tensor4<T>& t) {
  T s = 0;
  for (std::size_t i = 0; i < 81; ++i) s += t.v[i] * t.v[i];
  using std::sqrt;
  return sqrt(s);
}

}  // namespace viscostep
