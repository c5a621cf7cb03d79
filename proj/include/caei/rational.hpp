#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace caei {

/// Exact fraction with arbitrary-precision numerator and denominator.
/// GMP keeps every arithmetic result in canonical form (denominator > 0,
/// gcd(|num|, den) = 1).
using Rational = mpq_class;
using Integer = mpz_class;

/// Raised for malformed caller input (bad dimensions, out-of-range indices,
/// unparsable numbers). Distinct from "no solution" outcomes, which are
/// reported through return values.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw InputError("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Parses "a/b", "a", or a plain decimal such as "-0.375" or "1e-3" exactly.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw InputError("empty number");

  auto all_digits = [](std::string_view v) {
    if (v.empty()) return false;
    for (char c : v)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };

  bool negative = false;
  std::string_view body(s);
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }

  Rational out;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    std::string_view num = body.substr(0, slash);
    std::string_view den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) throw InputError("malformed fraction '" + s + "'");
    Integer d(std::string(den), 10);
    if (d == 0) throw InputError("zero denominator in '" + s + "'");
    out = Rational(Integer(std::string(num), 10), d);
    out.canonicalize();
  } else {
    std::string_view mantissa = body;
    long exponent = 0;
    if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = body.substr(0, e);
      std::string_view exp_part = body.substr(e + 1);
      bool exp_neg = false;
      if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
        exp_neg = exp_part.front() == '-';
        exp_part.remove_prefix(1);
      }
      if (!all_digits(exp_part) || exp_part.size() > 6) throw InputError("malformed exponent in '" + s + "'");
      exponent = std::stol(std::string(exp_part));
      if (exp_neg) exponent = -exponent;
    }
    std::string digits;
    long scale = 0;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
      std::string_view ip = mantissa.substr(0, dot);
      std::string_view fp = mantissa.substr(dot + 1);
      if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) || (ip.empty() && fp.empty()))
        throw InputError("malformed decimal '" + s + "'");
      digits = std::string(ip) + std::string(fp);
      scale = static_cast<long>(fp.size());
    } else {
      if (!all_digits(mantissa)) throw InputError("malformed number '" + s + "'");
      digits = std::string(mantissa);
    }
    scale -= exponent;
    Integer value(digits, 10);
    Integer ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    if (scale >= 0) {
      out = Rational(value, ten_pow);
    } else {
      out = Rational(value * ten_pow, 1);
    }
    out.canonicalize();
  }
  if (negative) out = -out;
  return out;
}

/// "a/b", or "a" when the denominator is 1.
inline std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Decimal rendering with `digits` significant digits, for inexact artifacts.
inline std::string to_decimal_string(const Rational& r, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, r.get_d());
  return buf;
}

/// Exact conversion; every finite double is a dyadic rational.
inline Rational from_double(double d) {
  if (!std::isfinite(d)) throw InputError("non-finite value");
  return Rational(d);
}

inline double to_double(const Rational& r) { return r.get_d(); }

inline Integer floor_of(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline bool is_zero(const Rational& r) { return sgn(r) == 0; }

using RationalMatrix = std::vector<std::vector<Rational>>;
using RationalVector = std::vector<Rational>;

}  // namespace caei
