#pragma once

// abc triples, their quality, the p^(q^(n-1)(q-1)) - 1 family and the bound
// comparators that go with it.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "abcwb/bigint.hpp"
#include "abcwb/errors.hpp"
#include "abcwb/numtheory.hpp"
#include "json.hpp"

namespace abcwb {

class NotCoprime : public ValidationError {
 public:
  explicit NotCoprime(BigInt g)
      : ValidationError("terms are not coprime (gcd = " + to_decimal(g) + ")"), gcd_(std::move(g)) {}
  const BigInt& common_divisor() const { return gcd_; }

 private:
  BigInt gcd_;
};

/// a + b = c with 1 <= a <= b < c and gcd(a, b) = 1. Only constructible
/// through the validating factories.
class AbcTriple {
 public:
  static AbcTriple from_terms(BigInt a, BigInt b, BigInt c) {
    if (a < 1 || b < 1) throw ValidationError("abc triple terms must be >= 1");
    if (a > b) std::swap(a, b);
    if (a + b != c) {
      throw ValidationError("a + b != c: " + to_decimal(a) + " + " + to_decimal(b) +
                            " != " + to_decimal(c));
    }
    BigInt g = gcd(a, b);
    if (g != 1) throw NotCoprime(std::move(g));
    return AbcTriple(std::move(a), std::move(b), std::move(c));
  }

  const BigInt& a() const { return a_; }
  const BigInt& b() const { return b_; }
  const BigInt& c() const { return c_; }

  friend bool operator==(const AbcTriple& l, const AbcTriple& r) {
    return l.a_ == r.a_ && l.b_ == r.b_ && l.c_ == r.c_;
  }

 private:
  AbcTriple(BigInt a, BigInt b, BigInt c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}
  BigInt a_, b_, c_;
};

/// Re-checks the triple invariants from raw terms; no exceptions.
inline bool is_valid_triple(const BigInt& a, const BigInt& b, const BigInt& c) {
  return a >= 1 && b >= a && a + b == c && gcd(a, b) == 1;
}

inline AbcTriple make_triple(const BigInt& u, const BigInt& v) {
  if (u < 1 || v < 1) throw ValidationError("make_triple: terms must be >= 1");
  return AbcTriple::from_terms(u, v, u + v);
}

struct QualityReport {
  BigInt radical;
  long double quality = 0;  // log c / log rad(abc); a lower bound when !certain
  bool certain = true;
  bool exceeds_radical = false;  // c > rad(abc), decided exactly
};

inline QualityReport quality_from_radical(const AbcTriple& t, Radical rad) {
  QualityReport out;
  out.radical = std::move(rad.value);
  out.certain = rad.certain;
  out.exceeds_radical = t.c() > out.radical;
  out.quality = log_abs(t.c()) / log_abs(out.radical);
  // Keep the float on the right side of 1 when c and rad are nearly equal.
  if (out.exceeds_radical && out.quality <= 1.0L) {
    out.quality = std::nextafter(1.0L, 2.0L);
  } else if (!out.exceeds_radical && t.c() != out.radical && out.quality >= 1.0L) {
    out.quality = std::nextafter(1.0L, 0.0L);
  }
  return out;
}

// rad(abc) = rad(a) rad(b) rad(c) since the terms are pairwise coprime.
template <typename Factorizer>
QualityReport quality_with(const AbcTriple& t, Factorizer&& factorize) {
  Radical total{BigInt(1), true};
  for (const BigInt* term : {&t.a(), &t.b(), &t.c()}) {
    const Radical r = radical(factorize(*term));
    total.value *= r.value;
    total.certain = total.certain && r.certain;
  }
  return quality_from_radical(t, std::move(total));
}

inline QualityReport quality(const AbcTriple& t, const FactorEffort& effort = {}) {
  return quality_with(t, [&](const BigInt& n) { return factor(n, effort); });
}

inline QualityReport quality(const AbcTriple& t, FactorMemo& memo) {
  return quality_with(t, [&](const BigInt& n) { return memo.get(n); });
}

/// Single-integer radical index log n / log rad(n), n >= 2.
inline long double radical_index(const BigInt& n, const FactorEffort& effort = {}) {
  if (n < 2) throw ValidationError("radical_index: n must be >= 2");
  return log_abs(n) / log_abs(radical(factor(n, effort)).value);
}

// ---------------------------------------------------------------------------
// a_n = p^(q^(n-1) (q-1)) - 1, b_n = 1, c_n = a_n + 1.

inline constexpr std::size_t kDefaultFamilyDigitCap = 100'000;

struct FamilyMember {
  unsigned n = 0;
  AbcTriple triple;
};

struct FamilyResult {
  std::vector<FamilyMember> members;
  std::vector<unsigned> skipped;  // n whose c_n exceeds the digit cap
};

inline void check_family_params(const BigInt& p, const BigInt& q) {
  if (p < 2) throw ValidationError("family: p must be >= 2");
  if (!is_probable_prime(q)) throw ValidationError("family: q = " + to_decimal(q) + " is not prime");
  const BigInt g = gcd(p, q);
  if (g != 1) throw NotCoprime(g);
}

inline BigInt family_exponent(const BigInt& q, unsigned n) {
  return pow_ui(q, n - 1) * (q - 1);
}

inline FamilyResult family_fermat(const BigInt& p, const BigInt& q, unsigned n_max,
                                  std::size_t digit_cap = kDefaultFamilyDigitCap) {
  check_family_params(p, q);
  if (n_max < 1) throw ValidationError("family: n_max must be >= 1");
  FamilyResult out;
  const long double log10_p = log_abs(p) / std::log(10.0L);
  for (unsigned n = 1; n <= n_max; ++n) {
    const BigInt e = family_exponent(q, n);
    const long double digits = e.get_d() * log10_p + 1;
    if (!e.fits_ulong_p() || digits > static_cast<long double>(digit_cap) + 1) {
      out.skipped.push_back(n);
      continue;
    }
    BigInt c = pow_ui(p, e.get_ui());
    if (decimal_digits(c) > digit_cap) {
      out.skipped.push_back(n);
      continue;
    }
    BigInt a = c - 1;
    out.members.push_back({n, AbcTriple::from_terms(BigInt(1), std::move(a), std::move(c))});
  }
  return out;
}

/// q^n | p^(q^(n-1)(q-1)) - 1, checked modulo q^n without expanding the power.
inline bool verify_family_divisibility(const BigInt& p, const BigInt& q, unsigned n) {
  check_family_params(p, q);
  if (n < 1) throw ValidationError("family: n must be >= 1");
  const BigInt modulus = pow_ui(q, n);
  return powmod(p, family_exponent(q, n), modulus) == 1 % modulus;
}

// ---------------------------------------------------------------------------
// Bound comparators. Everything is evaluated in log space with long double.

struct BoundParams {
  long double epsilon = 0.1L;
  long double c_epsilon = 1.0L;
  long double delta = 0.5L;
  long double c1 = 1.0L;

  void validate() const {
    if (!(epsilon >= 0)) throw ValidationError("epsilon must be >= 0");
    if (!(c_epsilon > 0)) throw ValidationError("c_epsilon must be > 0");
    if (!(delta > 0 && delta < 4)) throw ValidationError("delta must lie in (0, 4)");
    if (!(c1 > 0)) throw ValidationError("c1 must be > 0");
  }
};

enum class SqrtPlacement {
  log_only,        // exp((4 - d) sqrt(log N) / log log N), as printed
  whole_quotient,  // exp((4 - d) sqrt(log N / log log N))
};

/// log of N exp((4 - delta) ...). N >= 16 keeps log log N positive.
inline long double st_lower_bound_log(const BigInt& N, long double delta,
                                      SqrtPlacement placement = SqrtPlacement::log_only) {
  if (N < 16) throw ValidationError("st_lower_bound: N must be >= 16");
  if (!(delta >= 0 && delta <= 4)) throw ValidationError("st_lower_bound: delta must lie in [0, 4]");
  const long double log_n = log_abs(N);
  const long double loglog_n = std::log(log_n);
  const long double growth = placement == SqrtPlacement::log_only
                                 ? std::sqrt(log_n) / loglog_n
                                 : std::sqrt(log_n / loglog_n);
  return log_n + (4 - delta) * growth;
}

inline long double st_lower_bound(const BigInt& N, long double delta,
                                  SqrtPlacement placement = SqrtPlacement::log_only) {
  return std::exp(st_lower_bound_log(N, delta, placement));
}

/// Exponent c1 N^(1/3) (log N)^3 of the upper bound exp(...).
inline long double sy_upper_bound_log(const BigInt& N, long double c1) {
  if (N < 2) throw ValidationError("sy_upper_bound: N must be >= 2");
  if (!(c1 > 0)) throw ValidationError("sy_upper_bound: c1 must be > 0");
  const long double log_n = log_abs(N);
  return c1 * std::exp(log_n / 3) * log_n * log_n * log_n;
}

struct InequalityReport {
  BigInt lhs;                 // c
  long double log_lhs = 0;    // log c
  long double log_rhs = 0;    // log(c_eps rad^(1+eps))
  bool satisfied = false;     // c <= c_eps rad^(1+eps)
  bool certain = true;
};

inline InequalityReport inequality_from_radical(const AbcTriple& t, const BoundParams& params,
                                                const Radical& rad) {
  params.validate();
  InequalityReport out;
  out.lhs = t.c();
  out.certain = rad.certain;
  out.log_lhs = log_abs(t.c());
  out.log_rhs = std::log(params.c_epsilon) + (1 + params.epsilon) * log_abs(rad.value);
  out.satisfied = out.log_lhs <= out.log_rhs;
  return out;
}

inline InequalityReport abc_inequality_check(const AbcTriple& t, const BoundParams& params,
                                             const FactorEffort& effort = {}) {
  const QualityReport q = quality(t, effort);
  return inequality_from_radical(t, params, Radical{q.radical, q.certain});
}

// ---------------------------------------------------------------------------

inline nlohmann::json triple_json(const AbcTriple& t, const QualityReport& q,
                                  nlohmann::json source = nullptr) {
  return {{"a", to_decimal(t.a())},
          {"b", to_decimal(t.b())},
          {"c", to_decimal(t.c())},
          {"rad", to_decimal(q.radical)},
          {"quality", static_cast<double>(q.quality)},
          {"certain", q.certain},
          {"source", std::move(source)}};
}

}  // namespace abcwb
