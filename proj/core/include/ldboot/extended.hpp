#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

#include "ldboot/errors.hpp"

namespace ldboot {

/// A value in [0, +inf] or more generally (-inf, +inf]: rate functions and
/// relative entropies are genuinely extended-valued.
///
/// Sums saturate at +inf and scaling uses the measure-theoretic convention
/// 0 * inf = 0. NaN and -inf are rejected at construction.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;

  // Implicit on purpose: finite doubles are the common case.
  ExtendedReal(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
      throw DomainError("ExtendedReal: NaN or -inf is not representable");
    }
  }

  static ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  [[nodiscard]] bool is_finite() const { return std::isfinite(value_); }
  [[nodiscard]] bool is_infinite() const { return !is_finite(); }

  /// The underlying double; +inf when infinite.
  [[nodiscard]] double value() const { return value_; }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    if (a.is_infinite() || b.is_infinite()) return infinity();
    return ExtendedReal(a.value_ + b.value_);
  }
  ExtendedReal& operator+=(ExtendedReal other) {
    *this = *this + other;
    return *this;
  }

  /// Scale by a nonnegative factor; 0 * inf = 0.
  friend ExtendedReal operator*(double s, ExtendedReal x) {
    if (s < 0.0) throw DomainError("ExtendedReal: negative scale factor");
    if (s == 0.0) return ExtendedReal(0.0);
    if (x.is_infinite()) return infinity();
    return ExtendedReal(s * x.value_);
  }
  friend ExtendedReal operator*(ExtendedReal x, double s) { return s * x; }

  friend bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.value_ == b.value_;
  }
  friend std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b) {
    return a.value_ <=> b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal x) {
    if (x.is_infinite()) return os << "inf";
    return os << x.value_;
  }

 private:
  double value_ = 0.0;
};

inline ExtendedReal min(ExtendedReal a, ExtendedReal b) { return b < a ? b : a; }

}  // namespace ldboot
