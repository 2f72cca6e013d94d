#pragma once

#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "fringetrees/errors.hpp"

namespace fringetrees {

using BigInt = mpz_class;
using Rational = mpq_class;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// gmpxx has no long long constructors; on this ABI long carries 64 bits.
inline BigInt big(long long v) { return BigInt(static_cast<long>(v)); }
inline Rational rat(long long num) { return Rational(static_cast<long>(num)); }
inline Rational rat(long long num, long long den) {
  Rational q(static_cast<long>(num), static_cast<long>(den));
  q.canonicalize();
  return q;
}

// Natural log of a big integer without overflowing double range.
inline double ln(const BigInt& z) {
  if (sgn(z) <= 0) return kNegInf;
  signed long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * M_LN2;
}

inline double ln(const Rational& q) {
  if (sgn(q) <= 0) return kNegInf;
  return ln(BigInt(q.get_num())) - ln(BigInt(q.get_den()));
}

// Nonnegative scalar carried both as an arbitrary-precision rational (when
// affordable) and as a natural-log float. log == -inf encodes exact zero.
class ExactScalar {
public:
  ExactScalar() : log_(kNegInf) {}

  static ExactScalar zero() { return ExactScalar(); }
  static ExactScalar one() { return from_rational(Rational(1)); }

  static ExactScalar from_rational(Rational r) {
    if (sgn(r) < 0) raise(errc::invalid_encoding, "ExactScalar requires a nonnegative value");
    ExactScalar s;
    s.log_ = ln(r);
    r.canonicalize();
    s.rat_ = std::move(r);
    return s;
  }

  static ExactScalar from_log(double lnv) {
    ExactScalar s;
    s.log_ = lnv;
    return s;
  }

  static ExactScalar from_value(double v) {
    if (v < 0) raise(errc::invalid_encoding, "ExactScalar requires a nonnegative value");
    return from_log(v == 0 ? kNegInf : std::log(v));
  }

  bool is_zero() const { return log_ == kNegInf; }
  bool exact() const { return rat_.has_value(); }
  const Rational& rational() const {
    if (!rat_) raise(errc::precision_loss, "no rational companion present");
    return *rat_;
  }
  double log_value() const { return log_; }
  double value() const { return rat_ ? rat_->get_d() : std::exp(log_); }

  ExactScalar& operator*=(const ExactScalar& o) {
    if (rat_ && o.rat_) {
      *rat_ *= *o.rat_;
    } else {
      rat_.reset();
    }
    log_ = is_zero() || o.is_zero() ? kNegInf : log_ + o.log_;
    return *this;
  }
  friend ExactScalar operator*(ExactScalar a, const ExactScalar& b) { return a *= b; }

  ExactScalar& operator+=(const ExactScalar& o) {
    if (rat_ && o.rat_) {
      *rat_ += *o.rat_;
    } else {
      rat_.reset();
    }
    log_ = log_add(log_, o.log_);
    return *this;
  }
  friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }

  ExactScalar pow(long long q) const {
    if (q < 0) raise(errc::invalid_order, "negative power");
    ExactScalar out = one();
    if (rat_) {
      Rational r;
      mpz_pow_ui(r.get_num_mpz_t(), rat_->get_num_mpz_t(), static_cast<unsigned long>(q));
      mpz_pow_ui(r.get_den_mpz_t(), rat_->get_den_mpz_t(), static_cast<unsigned long>(q));
      out = from_rational(r);
    } else {
      out = q == 0 ? one() : from_log(log_ * static_cast<double>(q));
    }
    return out;
  }

  // Comparisons prefer the rational side; log comparison is floating point
  // and only meaningful away from ties.
  friend bool operator==(const ExactScalar& a, const ExactScalar& b) {
    if (a.rat_ && b.rat_) return *a.rat_ == *b.rat_;
    return a.log_ == b.log_;
  }
  friend bool operator<(const ExactScalar& a, const ExactScalar& b) {
    if (a.rat_ && b.rat_) return *a.rat_ < *b.rat_;
    return a.log_ < b.log_;
  }
  friend bool operator<=(const ExactScalar& a, const ExactScalar& b) { return a == b || a < b; }

  static double log_add(double la, double lb) {
    if (la == kNegInf) return lb;
    if (lb == kNegInf) return la;
    if (la < lb) std::swap(la, lb);
    return la + std::log1p(std::exp(lb - la));
  }

private:
  std::optional<Rational> rat_;
  double log_;
};

// Signed companion for moment differences (variance arithmetic).
struct SignedValue {
  std::optional<Rational> rational;
  double value = 0;

  double as_double() const { return rational ? rational->get_d() : value; }
};

// (x)_q = x(x-1)...(x-q+1); zero when the product hits a nonpositive factor.
inline BigInt falling_factorial(long long x, long long q) {
  if (q < 0) raise(errc::invalid_order, "falling factorial needs q >= 0");
  if (x - q + 1 <= 0 && q > 0) return BigInt(0);
  BigInt out(1);
  for (long long i = 0; i < q; ++i) out *= big(x - i);
  return out;
}

inline double ln_falling_factorial(long long x, long long q) {
  if (q < 0) raise(errc::invalid_order, "falling factorial needs q >= 0");
  if (q == 0) return 0.0;
  if (x - q + 1 <= 0) return kNegInf;
  return std::lgamma(static_cast<double>(x) + 1.0) - std::lgamma(static_cast<double>(x - q) + 1.0);
}

inline ExactScalar exact_falling_factorial(long long x, long long q, bool rational_mode) {
  if (rational_mode) return ExactScalar::from_rational(Rational(falling_factorial(x, q)));
  return ExactScalar::from_log(ln_falling_factorial(x, q));
}

}  // namespace fringetrees
