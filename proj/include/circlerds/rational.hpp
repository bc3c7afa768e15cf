#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "circlerds/error.hpp"

namespace circlerds {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "p/q" or "p" (optionally signed). Rejects anything else, including
/// decimal notation, so that serialized systems stay exact.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty rational");
  auto valid_int = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+')
    throw Error(ErrorCode::ParseError, "malformed rational '" + std::string(text) + "'");
  std::string n(num.front() == '+' ? num.substr(1) : num);
  Integer zn(n), zd{std::string(den)};
  if (zd == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
  Rational q(zn, zd);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Integer ceil_of(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

/// Fractional part in [0, 1).
inline Rational frac(const Rational& q) {
  Rational r = q - Rational(floor_of(q));
  return r;
}

inline Rational abs_of(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline double to_double(const Rational& q) { return q.get_d(); }

/// Stable 64-bit fingerprint of a rational, used to key random streams.
inline std::uint64_t fingerprint(const Rational& q) {
  auto mix = [](std::uint64_t h, const mpz_class& z) {
    std::size_t n = mpz_size(z.get_mpz_t());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<std::uint64_t>(mpz_getlimbn(z.get_mpz_t(), i)) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    h ^= static_cast<std::uint64_t>(mpz_sgn(z.get_mpz_t()) + 2) * 0xBF58476D1CE4E5B9ull;
    return h;
  };
  return mix(mix(0x243F6A8885A308D3ull, q.get_num()), q.get_den());
}

}  // namespace circlerds
