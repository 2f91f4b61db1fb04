#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace klb {

/// Nonnegative real extended with +infinity; the codomain of every
/// divergence in this library. Never holds NaN. Tiny negatives from
/// floating-point cancellation (>= -1e-9) are clamped to zero; anything
/// more negative indicates a non-convex generator and throws.
class ExtendedReal {
 public:
  ExtendedReal() : v_(0.0) {}

  ExtendedReal(double v) : v_(v) {  // NOLINT: implicit by design
    if (std::isnan(v_)) throw std::domain_error("ExtendedReal: NaN");
    if (v_ < 0.0) {
      if (v_ < -kNegClamp) throw std::domain_error("ExtendedReal: negative value");
      v_ = 0.0;
    }
  }

  static ExtendedReal infinity() {
    ExtendedReal r;
    r.v_ = std::numeric_limits<double>::infinity();
    return r;
  }

  bool is_finite() const { return std::isfinite(v_); }
  bool is_infinite() const { return std::isinf(v_); }
  double value() const { return v_; }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    return ExtendedReal(a.v_ + b.v_);  // +inf absorbs
  }
  ExtendedReal& operator+=(ExtendedReal b) {
    v_ += b.v_;
    return *this;
  }
  /// Scale by a nonnegative constant; 0 * inf := 0 (absorbing-mass convention).
  friend ExtendedReal scale(double c, ExtendedReal a) {
    if (c < 0.0) throw std::domain_error("ExtendedReal::scale: negative factor");
    if (c == 0.0) return ExtendedReal(0.0);
    return ExtendedReal(c * a.v_);
  }

  friend bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }
  friend bool operator<(ExtendedReal a, ExtendedReal b) { return a.v_ < b.v_; }
  friend bool operator<=(ExtendedReal a, ExtendedReal b) { return a.v_ <= b.v_; }
  friend bool operator>(ExtendedReal a, ExtendedReal b) { return a.v_ > b.v_; }
  friend bool operator>=(ExtendedReal a, ExtendedReal b) { return a.v_ >= b.v_; }

  static constexpr double kNegClamp = 1e-9;

 private:
  double v_;
};

}  // namespace klb
