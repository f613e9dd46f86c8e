#pragma once

#include <cmath>
#include <limits>
#include <ostream>

namespace mal {

/// A value in R ∪ {+∞}. Addition saturates at +∞; -∞ and NaN are not representable.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  // NOLINTNEXTLINE(google-explicit-constructor)
  constexpr ExtendedReal(double v) : value_(v), infinite_(v == std::numeric_limits<double>::infinity()) {}

  static constexpr ExtendedReal infinity() { return ExtendedReal(std::numeric_limits<double>::infinity()); }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  /// The finite value, or +inf as a double.
  constexpr double value() const { return infinite_ ? std::numeric_limits<double>::infinity() : value_; }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal o) { return *this = *this + o; }

  /// Scaling by a nonnegative weight; 0·∞ = 0 (measure-theoretic convention).
  friend constexpr ExtendedReal operator*(double w, ExtendedReal a) {
    if (w == 0.0) return ExtendedReal(0.0);
    if (a.infinite_) return infinity();
    return ExtendedReal(w * a.value_);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) { return a.value() < b.value(); }
  friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) { return a.value() <= b.value(); }
  friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) { return b < a; }
  friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) { return b <= a; }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal a) {
    if (a.infinite_) return os << "+inf";
    return os << a.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace mal
