// Exact arithmetic scalar types and small integer-vector helpers used
// throughout the library.  All linear algebra is over arbitrary-precision
// rationals; lattice data (ray generators, divisor coefficients, characters)
// is 64-bit, which the model loader enforces at parse time.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

using Int = long long;
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

using Vec = std::vector<Int>;   // lattice vector (character or ray generator)

inline BigInt numerator(const Rat& q) { return boost::multiprecision::numerator(q); }
inline BigInt denominator(const Rat& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rat& q) { return denominator(q) == 1; }

// Throws if the value does not fit in Int; the callers surface this as a
// model validation error.
inline Int to_int64(const BigInt& v) {
  if (v > BigInt(INT64_MAX) || v < BigInt(INT64_MIN))
    throw std::overflow_error("integer too large for the 64-bit lattice range: " + v.str());
  return static_cast<Int>(v);
}

// floor(q) and ceil(q) as 64-bit lattice coordinates
inline Int rat_floor(const Rat& q) {
  BigInt num = numerator(q), den = denominator(q);
  BigInt r;
  if (num >= 0) r = num / den;
  else r = -(((-num) + den - 1) / den);
  return to_int64(r);
}

inline Int rat_ceil(const Rat& q) {
  BigInt num = numerator(q), den = denominator(q);
  BigInt r;
  if (num >= 0) r = (num + den - 1) / den;
  else r = -((-num) / den);
  return to_int64(r);
}

inline Int gcd_of(const Vec& v) {
  Int g = 0;
  for (Int x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

inline bool is_zero(const Vec& v) {
  for (Int x : v) if (x != 0) return false;
  return true;
}

inline Int dot(const Vec& a, const Vec& b) {
  Int s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(Int c, const Vec& a) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline Vec negate(const Vec& a) { return scale(-1, a); }

inline std::string vec_to_string(const Vec& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  s += ")";
  return s;
}

inline Vec vec_from_string(const std::string& s) {
  Vec v;
  std::string cur;
  for (char ch : s) {
    if (ch == '(' || ch == ' ') continue;
    if (ch == ',' || ch == ')') {
      if (!cur.empty()) {
        v.push_back(std::stoll(cur));
        cur.clear();
      }
      continue;
    }
    cur += ch;
  }
  if (!cur.empty()) v.push_back(std::stoll(cur));
  return v;
}

// Rational formatted as "p" or "p/q"; used by the model format and reports.
inline std::string rat_to_string(const Rat& q) {
  if (is_integer(q)) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline Rat rat_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(BigInt(s));
  BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
  if (den == 0) throw std::invalid_argument("zero denominator in rational: " + s);
  return Rat(num, den);
}

}  // namespace toric
