#pragma once

// Arbitrary-precision integer helpers shared by every module.
//
// Integers are GMP mpz_class values. They cross module and file boundaries
// only as plain decimal strings: no hex, no exponents, no
// surrounding whitespace.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "abcwb/errors.hpp"

namespace abcwb {

using BigInt = mpz_class;

inline std::string to_decimal(const BigInt& v) { return v.get_str(10); }

/// Parses a signed decimal integer ("-12", "0", "6436343").
inline BigInt parse_integer(std::string_view text) {
  std::string_view digits = text;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
    digits.remove_prefix(1);
  }
  if (digits.empty()) {
    throw ValidationError("empty integer literal");
  }
  for (char ch : digits) {
    if (ch < '0' || ch > '9') {
      throw ValidationError("not a decimal integer: '" + std::string(text) + "'");
    }
  }
  BigInt out;
  std::string body(text.front() == '+' ? text.substr(1) : text);
  if (out.set_str(body, 10) != 0) {
    throw ValidationError("not a decimal integer: '" + std::string(text) + "'");
  }
  return out;
}

/// Parses a non-negative decimal integer.
inline BigInt parse_natural(std::string_view text) {
  BigInt v = parse_integer(text);
  if (v < 0) {
    throw ValidationError("expected a non-negative integer, got " + std::string(text));
  }
  return v;
}

inline BigInt abs_value(const BigInt& v) { return abs(v); }

inline BigInt gcd(const BigInt& a, const BigInt& b) {
  BigInt out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline BigInt pow_ui(const BigInt& base, unsigned long exp) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

/// Exact number of decimal digits of |v| (0 has one digit).
inline std::size_t decimal_digits(const BigInt& v) {
  if (v == 0) return 1;
  // mpz_sizeinbase may overshoot by one for base 10.
  std::size_t est = mpz_sizeinbase(v.get_mpz_t(), 10);
  BigInt bound = pow_ui(BigInt(10), static_cast<unsigned long>(est - 1));
  return abs(v) < bound ? est - 1 : est;
}

/// Natural log of |v| in extended precision. Uses the top 64 bits of the
/// magnitude, so the relative error is at the long double rounding level.
/// log(0) is -infinity.
inline long double log_abs(const BigInt& v) {
  if (v == 0) return -std::numeric_limits<long double>::infinity();
  BigInt mag = abs(v);
  const std::size_t bits = mpz_sizeinbase(mag.get_mpz_t(), 2);
  if (bits <= 64) {
    std::uint64_t word = 0;
    mpz_export(&word, nullptr, -1, sizeof(word), 0, 0, mag.get_mpz_t());
    return std::log(static_cast<long double>(word));
  }
  const std::size_t shift = bits - 64;
  BigInt top = mag >> static_cast<mp_bitcnt_t>(shift);
  std::uint64_t word = 0;
  mpz_export(&word, nullptr, -1, sizeof(word), 0, 0, top.get_mpz_t());
  return std::log(static_cast<long double>(word)) +
         static_cast<long double>(shift) * std::log(2.0L);
}

/// Exact integer square root when v is a perfect square.
inline bool exact_sqrt(const BigInt& v, BigInt& root) {
  if (v < 0 || mpz_perfect_square_p(v.get_mpz_t()) == 0) return false;
  mpz_sqrt(root.get_mpz_t(), v.get_mpz_t());
  return true;
}

inline bool fits_u64(const BigInt& v) {
  return v >= 0 && mpz_sizeinbase(v.get_mpz_t(), 2) <= 64;
}

inline std::uint64_t to_u64(const BigInt& v) {
  std::uint64_t word = 0;
  if (v != 0) mpz_export(&word, nullptr, -1, sizeof(word), 0, 0, v.get_mpz_t());
  return word;
}

inline BigInt from_u64(std::uint64_t w) {
  BigInt out;
  mpz_import(out.get_mpz_t(), 1, -1, sizeof(w), 0, 0, &w);
  return out;
}

}  // namespace abcwb
