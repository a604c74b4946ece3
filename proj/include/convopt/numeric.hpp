#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace convopt {

// All counts and LP coefficients are arbitrary precision; realistic layer
// sizes overflow 64-bit words (AlexNet's flop count already exceeds 2^36,
// products of bounds go much further). Expression templates are off so the
// types behave as plain values in std algorithms.
using Int = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                          boost::multiprecision::et_off>;
using Rat = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

inline Int floor_div(const Int& a, const Int& b) {
  if (b == 0) throw std::domain_error("floor_div by zero");
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int ceil_div(const Int& a, const Int& b) { return -floor_div(-a, b); }

/// Largest integer whose square does not exceed n.
inline Int isqrt(const Int& n) {
  if (n < 0) throw std::domain_error("isqrt of negative");
  return boost::multiprecision::sqrt(n);
}

inline Int rat_floor(const Rat& r) {
  return floor_div(boost::multiprecision::numerator(r),
                   boost::multiprecision::denominator(r));
}

inline Int rat_ceil(const Rat& r) { return -rat_floor(-r); }

/// floor(sqrt(r)) for a nonnegative rational: floor(sqrt(x)) and
/// floor(sqrt(floor(x))) agree for x >= 0, so one integer sqrt suffices.
inline Int rat_floor_sqrt(const Rat& r) {
  if (r < 0) throw std::domain_error("sqrt of negative");
  return isqrt(rat_floor(r));
}

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline double to_double(const Int& i) { return i.convert_to<double>(); }

inline std::string to_string(const Int& i) { return i.str(); }

/// Serializes a rational as "p" or "p/q" for bit-exact round-tripping.
inline std::string rat_to_string(const Rat& r) {
  Int num = boost::multiprecision::numerator(r);
  Int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline Rat rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(Int(s));
  Int num(s.substr(0, slash));
  Int den(s.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  return Rat(num, den);
}

/// Rational approximation of log_base(x) with denominator 2^40. Used only
/// where a concrete layer is instantiated into the log-space LP; all region
/// and dominance decisions stay in exact arithmetic.
inline Rat log_approx(const Int& x, const Int& base) {
  if (x <= 0 || base <= 1) throw std::domain_error("log_approx domain");
  long double lx = std::log2(x.convert_to<long double>());
  long double lb = std::log2(base.convert_to<long double>());
  long double v = lx / lb;
  const long double scale = 1099511627776.0L;  // 2^40
  Int num(static_cast<long long>(std::llroundl(v * scale)));
  return Rat(num, Int(1) << 40);
}

/// base^e for rational e, evaluated in long double. Exponents here are in
/// [0, log_M bound], so the result fits comfortably.
inline long double pow_approx(const Int& base, const Rat& e) {
  long double lb = std::log2(base.convert_to<long double>());
  long double ex = e.convert_to<long double>();
  return std::exp2(lb * ex);
}

}  // namespace convopt
