#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <ostream>
#include <string>

#include "homchain/errors.hpp"

namespace homchain {

// Value in (-inf, +inf]. Positive infinity is carried as an explicit tag and
// never as a floating-point inf inside the payload, so arithmetic on finite
// values stays ordinary double arithmetic.
class ExtReal {
public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_(v) {} // NOLINT(implicit)

  static constexpr ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  // Maps a double that may have overflowed to +inf onto the tagged form.
  static ExtReal from_double(double v) {
    if (std::isnan(v)) throw DomainError("ExtReal: NaN is not an extended real");
    if (v == std::numeric_limits<double>::infinity()) return infinity();
    if (v == -std::numeric_limits<double>::infinity())
      throw DomainError("ExtReal: -inf is outside (-inf, +inf]");
    return ExtReal(v);
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw DomainError("ExtReal: value() on +inf");
    return value_;
  }

  // Finite payload or +inf as a double; for output and comparisons only.
  double to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  ExtReal& operator+=(const ExtReal& o) {
    if (infinite_ || o.infinite_) {
      infinite_ = true;
      value_ = 0.0;
    } else {
      value_ += o.value_;
    }
    return *this;
  }

  friend ExtReal operator+(ExtReal a, const ExtReal& b) { return a += b; }

  // Multiplication by a positive weight (lattice spacing, 1/N).
  friend ExtReal scale(ExtReal a, double w) {
    if (!(w > 0.0)) throw DomainError("ExtReal: scale weight must be positive");
    if (a.infinite_) return a;
    return ExtReal(a.value_ * w);
  }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_ && b.infinite_) return std::partial_ordering::equivalent;
    if (a.infinite_) return std::partial_ordering::greater;
    if (b.infinite_) return std::partial_ordering::less;
    return a.value_ <=> b.value_;
  }

  std::string str() const;

private:
  double value_ = 0.0;
  bool infinite_ = false;
};

inline constexpr ExtReal kInfinity = ExtReal::infinity();

} // namespace homchain

#include "homchain/format.hpp"

namespace homchain {

inline std::string ExtReal::str() const {
  return infinite_ ? std::string("inf") : format_double(value_);
}

inline std::ostream& operator<<(std::ostream& os, const ExtReal& x) { return os << x.str(); }

} // namespace homchain
