#pragma once

// Error-free transformations and compensated accumulation.

#include <cmath>
#include <span>

namespace hhslow {

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  double value() const noexcept { return hi + lo; }
};

/// Knuth's TwoSum: a + b == s + err exactly.
inline DoubleDouble two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline DoubleDouble two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept {
  auto s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return two_sum(s.hi, s.lo);
}

inline DoubleDouble operator-(DoubleDouble a) noexcept { return {-a.hi, -a.lo}; }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept { return a + (-b); }

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept {
  auto p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return two_sum(p.hi, p.lo);
}

/// Neumaier's variant of Kahan summation; robust when addends exceed the
/// running sum in magnitude.
template <typename Value = double>
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(Value initial) : sum_(initial) {}

  CompensatedSum& operator+=(Value value) noexcept {
    const Value t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  Value value() const noexcept { return sum_ + compensation_; }
  explicit operator Value() const noexcept { return value(); }

 private:
  Value sum_{0};
  Value compensation_{0};
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum<double> acc;
  for (double v : values) acc += v;
  return acc.value();
}

}  // namespace hhslow
