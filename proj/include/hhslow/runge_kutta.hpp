#pragma once

// Small fixed-size vector and explicit Runge-Kutta steps for the
// non-separable auxiliary systems (section landing, reference solutions).

#include <array>
#include <cstddef>

namespace hhslow {

template <typename T, std::size_t N>
struct Vec {
  std::array<T, N> c{};

  constexpr T& operator[](std::size_t i) noexcept { return c[i]; }
  constexpr const T& operator[](std::size_t i) const noexcept { return c[i]; }

  constexpr Vec& operator+=(const Vec& o) noexcept {
    for (std::size_t i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  friend constexpr Vec operator+(Vec a, const Vec& b) noexcept { return a += b; }
  friend constexpr Vec operator*(double s, Vec a) noexcept {
    for (auto& x : a.c) x *= s;
    return a;
  }
};

/// Butcher tableau of an explicit method with `S` stages.
template <std::size_t S>
struct ButcherTableau {
  std::array<std::array<double, S>, S> a{};
  std::array<double, S> b{};
  std::array<double, S> c{};
  int order = 0;
};

inline constexpr ButcherTableau<4> kClassicalRk4 = {
    .a = {{{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}}},
    .b = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6},
    .c = {0, 0.5, 0.5, 1},
    .order = 4,
};

// Butcher's seven-stage sixth-order method.
inline constexpr ButcherTableau<7> kButcherRk6 = {
    .a = {{{0, 0, 0, 0, 0, 0, 0},
           {1.0 / 3, 0, 0, 0, 0, 0, 0},
           {0, 2.0 / 3, 0, 0, 0, 0, 0},
           {1.0 / 12, 1.0 / 3, -1.0 / 12, 0, 0, 0, 0},
           {-1.0 / 16, 9.0 / 8, -3.0 / 16, -3.0 / 8, 0, 0, 0},
           {0, 9.0 / 8, -3.0 / 8, -3.0 / 4, 1.0 / 2, 0, 0},
           {9.0 / 44, -9.0 / 11, 63.0 / 44, 18.0 / 11, 0, -16.0 / 11, 0}}},
    .b = {11.0 / 120, 0, 27.0 / 40, 27.0 / 40, -4.0 / 15, -4.0 / 15, 11.0 / 120},
    .c = {0, 1.0 / 3, 2.0 / 3, 1.0 / 3, 1.0 / 2, 1.0 / 2, 1},
    .order = 6,
};

/// One step of `y' = f(s, y)` from `s` with increment `h`.
template <std::size_t S, typename V, typename F>
V rk_step(const ButcherTableau<S>& tab, F&& f, double s, const V& y, double h) {
  std::array<V, S> k{};
  for (std::size_t i = 0; i < S; ++i) {
    V yi = y;
    for (std::size_t j = 0; j < i; ++j) {
      if (tab.a[i][j] != 0.0) yi += (h * tab.a[i][j]) * k[j];
    }
    k[i] = f(s + tab.c[i] * h, yi);
  }
  V out = y;
  for (std::size_t i = 0; i < S; ++i) {
    if (tab.b[i] != 0.0) out += (h * tab.b[i]) * k[i];
  }
  return out;
}

}  // namespace hhslow
