#pragma once

#ifdef __FAST_MATH__
#error "compensated summation is void under -ffast-math"
#endif

#include <cmath>

namespace mallows {

// Neumaier's variant of Kahan summation; the carry also covers the case
// where the incoming term dominates the running sum.
template <typename T>
struct NeumaierSum {
  T sum{0};
  T carry{0};

  void add(T value) {
    const T t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      carry += (sum - t) + value;
    } else {
      carry += (value - t) + sum;
    }
    sum = t;
  }

  NeumaierSum& operator+=(T value) {
    add(value);
    return *this;
  }

  T value() const { return sum + carry; }
};

// Non-overlapping double-double value (hi + lo, |lo| <= ulp(hi)/2).
// Ryser's alternating subset sum cancels ~e^n of its magnitude, so the
// row sums, products and the accumulator all carry ~106 bits here.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  DoubleDouble() = default;
  explicit DoubleDouble(double x) : hi(x), lo(0.0) {}
  DoubleDouble(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

namespace dd_detail {

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

// requires |a| >= |b| or a == 0
inline DoubleDouble quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline DoubleDouble operator+(DoubleDouble a, double b) {
  DoubleDouble s = dd_detail::two_sum(a.hi, b);
  return dd_detail::quick_two_sum(s.hi, s.lo + a.lo);
}

inline DoubleDouble operator-(DoubleDouble a, double b) { return a + (-b); }

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) {
  DoubleDouble s = dd_detail::two_sum(a.hi, b.hi);
  return dd_detail::quick_two_sum(s.hi, s.lo + (a.lo + b.lo));
}

inline DoubleDouble operator-(DoubleDouble a) { return {-a.hi, -a.lo}; }

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) {
  DoubleDouble p = dd_detail::two_prod(a.hi, b.hi);
  return dd_detail::quick_two_sum(p.hi, p.lo + (a.hi * b.lo + a.lo * b.hi));
}

inline DoubleDouble operator*(DoubleDouble a, double b) {
  DoubleDouble p = dd_detail::two_prod(a.hi, b);
  return dd_detail::quick_two_sum(p.hi, p.lo + a.lo * b);
}

}  // namespace mallows
