#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include "adt/rational.hpp"

namespace adt {

// A transport cost that stays an exact rational as long as every input was
// exact, and degrades to a double otherwise (non-integer orders p).
class Cost {
 public:
  Cost() = default;
  Cost(const Rational& q) : exact_(true), q_(q) {}  // NOLINT(google-explicit-constructor)
  Cost(int n) : exact_(true), q_(n) {}              // NOLINT(google-explicit-constructor)

  static Cost approximate(double value) {
    Cost c;
    c.exact_ = false;
    c.f_ = value;
    return c;
  }

  bool exact() const { return exact_; }

  const Rational& rational() const {
    if (!exact_) throw Error(ErrorCode::kInvalidArgument, "cost is not exact");
    return q_;
  }

  double to_double() const { return exact_ ? adt::to_double(q_) : f_; }

  Cost& operator+=(const Cost& other) {
    if (exact_ && other.exact_) {
      q_ += other.q_;
    } else {
      f_ = to_double() + other.to_double();
      exact_ = false;
    }
    return *this;
  }

  Cost& operator-=(const Cost& other) {
    if (exact_ && other.exact_) {
      q_ -= other.q_;
    } else {
      f_ = to_double() - other.to_double();
      exact_ = false;
    }
    return *this;
  }

  Cost& operator*=(const Rational& w) {
    if (exact_) {
      q_ *= w;
    } else {
      f_ *= adt::to_double(w);
    }
    return *this;
  }

  friend Cost operator+(Cost a, const Cost& b) { return a += b; }
  friend Cost operator-(Cost a, const Cost& b) { return a -= b; }
  friend Cost operator*(Cost a, const Rational& w) { return a *= w; }
  friend Cost operator*(const Rational& w, Cost a) { return a *= w; }

  friend bool operator==(const Cost& a, const Cost& b) {
    if (a.exact_ && b.exact_) return a.q_ == b.q_;
    return a.to_double() == b.to_double();
  }
  friend bool operator<(const Cost& a, const Cost& b) {
    if (a.exact_ && b.exact_) return a.q_ < b.q_;
    return a.to_double() < b.to_double();
  }
  friend bool operator>(const Cost& a, const Cost& b) { return b < a; }
  friend bool operator<=(const Cost& a, const Cost& b) { return !(b < a); }
  friend bool operator>=(const Cost& a, const Cost& b) { return !(a < b); }

  bool is_zero() const { return exact_ ? q_ == 0 : f_ == 0.0; }
  bool is_negative() const { return exact_ ? q_ < 0 : f_ < 0.0; }

  std::string str() const { return exact_ ? adt::to_string(q_) : std::to_string(f_); }

 private:
  bool exact_ = true;
  Rational q_ = 0;
  double f_ = 0.0;
};

inline Cost min(const Cost& a, const Cost& b) { return b < a ? b : a; }

inline bool approx_equal(const Cost& a, const Cost& b, double tol) {
  if (a.exact() && b.exact()) return a.rational() == b.rational();
  return std::fabs(a.to_double() - b.to_double()) <= tol;
}

inline std::ostream& operator<<(std::ostream& os, const Cost& c) { return os << c.str(); }

}  // namespace adt
