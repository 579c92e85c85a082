#pragma once

// Integer services: primality, factorization, radicals, omega, phi, powmod.
//
// Factoring is trial division up to a configurable bound, then Pollard rho
// with Brent's cycle detection under an iteration cap. Whatever the budget
// cannot split stays in the cofactor and the factorization is flagged
// uncertain; factor() never fails for lack of effort.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abcwb/bigint.hpp"
#include "abcwb/errors.hpp"

namespace abcwb {

struct FactorEffort {
  std::uint64_t trial_bound = 1'000'000;
  std::uint64_t rho_cap = 5'000'000;  // iterations per composite handed to rho
  std::uint64_t seed = 0xabc0'2003'5eedULL;

  friend bool operator==(const FactorEffort&, const FactorEffort&) = default;
};

struct PrimePower {
  BigInt prime;
  unsigned exponent = 0;

  friend bool operator==(const PrimePower& l, const PrimePower& r) {
    return l.prime == r.prime && l.exponent == r.exponent;
  }
};

struct Factorization {
  std::vector<PrimePower> factors;  // strictly increasing primes
  BigInt cofactor = 1;              // unfactored part, 1 when complete

  bool certain() const { return cofactor == 1; }

  BigInt product() const {
    BigInt out = cofactor;
    for (const auto& pp : factors) out *= pow_ui(pp.prime, pp.exponent);
    return out;
  }

  friend bool operator==(const Factorization& l, const Factorization& r) {
    return l.factors == r.factors && l.cofactor == r.cofactor;
  }
};

namespace detail {

inline std::vector<std::uint32_t> sieve_primes(std::uint64_t bound) {
  std::vector<std::uint32_t> primes;
  if (bound < 2) return primes;
  std::vector<bool> composite(bound + 1, false);
  for (std::uint64_t i = 2; i <= bound; ++i) {
    if (composite[i]) continue;
    primes.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= bound; j += i) composite[j] = true;
  }
  return primes;
}

// Shared, immutable prime tables keyed by bound.
inline std::shared_ptr<const std::vector<std::uint32_t>> primes_up_to(std::uint64_t bound) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const std::vector<std::uint32_t>>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(bound);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<const std::vector<std::uint32_t>>(sieve_primes(bound));
  cache.emplace(bound, table);
  return table;
}

inline std::uint64_t mulmod64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1U) result = mulmod64(result, base, m);
    base = mulmod64(base, base, m);
    exp >>= 1U;
  }
  return result;
}

inline bool strong_probable_prime64(std::uint64_t n, std::uint64_t a) {
  a %= n;
  if (a == 0) return true;
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  std::uint64_t x = powmod64(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int r = 1; r < s; ++r) {
    x = mulmod64(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

inline bool strong_probable_prime(const BigInt& n, const BigInt& a) {
  BigInt d = n - 1;
  const mp_bitcnt_t s = mpz_scan1(d.get_mpz_t(), 0);
  d >>= s;
  BigInt x;
  mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
  const BigInt minus_one = n - 1;
  if (x == 1 || x == minus_one) return true;
  for (mp_bitcnt_t r = 1; r < s; ++r) {
    x = x * x % n;
    if (x == minus_one) return true;
  }
  return false;
}

// Deterministic for every n < 3.3e24, in particular all 64-bit n.
inline constexpr std::uint32_t kFixedBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
inline constexpr int kRandomRounds = 24;
inline constexpr std::uint64_t kPrimalitySeed = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Strong-pseudoprime test. Fixed bases {2..37} decide every 64-bit input;
/// larger inputs additionally get seeded random-base rounds.
inline bool is_probable_prime(const BigInt& n) {
  if (n < 2) return false;
  for (std::uint32_t p : detail::kFixedBases) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p) != 0) return false;
  }
  if (fits_u64(n)) {
    const std::uint64_t v = to_u64(n);
    for (std::uint32_t a : detail::kFixedBases) {
      if (!detail::strong_probable_prime64(v, a)) return false;
    }
    return true;
  }
  for (std::uint32_t a : detail::kFixedBases) {
    if (!detail::strong_probable_prime(n, BigInt(a))) return false;
  }
  std::mt19937_64 rng(detail::kPrimalitySeed);
  const BigInt span = n - 3;  // bases in [2, n-2]
  for (int round = 0; round < detail::kRandomRounds; ++round) {
    BigInt a = (from_u64(rng()) << 64) + from_u64(rng());
    a = a % span + 2;
    if (!detail::strong_probable_prime(n, a)) return false;
  }
  return true;
}

namespace detail {

// Pollard rho, Brent variant, f(x) = x^2 + c. Products of |x - y| are
// batched between gcds; on overshoot the last batch is replayed one step at
// a time. Returns a nontrivial divisor or nullopt once `cap` iterations are
// spent across all retried constants.
inline std::optional<BigInt> brent_rho(const BigInt& n, std::uint64_t cap, std::mt19937_64& rng) {
  if (mpz_even_p(n.get_mpz_t()) != 0) return BigInt(2);
  constexpr std::uint64_t kBatch = 128;
  std::uint64_t spent = 0;
  while (spent < cap) {
    const BigInt c = from_u64(rng() % 1'000'000 + 1) % n;
    BigInt y = from_u64(rng()) % n;
    BigInt x, ys, q = 1, g = 1, diff;
    auto step = [&](BigInt& v) {
      mpz_mul(v.get_mpz_t(), v.get_mpz_t(), v.get_mpz_t());
      mpz_add(v.get_mpz_t(), v.get_mpz_t(), c.get_mpz_t());
      mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    };
    std::uint64_t r = 1;
    while (g == 1 && spent < cap) {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) step(y);
      spent += r;
      std::uint64_t k = 0;
      while (k < r && g == 1) {
        ys = y;
        const std::uint64_t batch = std::min(kBatch, r - k);
        for (std::uint64_t i = 0; i < batch; ++i) {
          step(y);
          mpz_sub(diff.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t());
          mpz_mul(q.get_mpz_t(), q.get_mpz_t(), diff.get_mpz_t());
          mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        }
        spent += batch;
        g = gcd(q, n);
        k += batch;
      }
      r *= 2;
    }
    if (g == 1) break;
    if (g == n) {
      // Batch product hit zero; walk the batch again step by step.
      do {
        step(ys);
        diff = x - ys;
        g = gcd(abs(diff), n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
  return std::nullopt;
}

// Largest k >= 2 with n = root^k, if any.
inline std::optional<std::pair<BigInt, unsigned>> perfect_power(const BigInt& n) {
  if (n < 4 || mpz_perfect_power_p(n.get_mpz_t()) == 0) return std::nullopt;
  const auto bits = static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2));
  for (unsigned k = bits; k >= 2; --k) {
    BigInt root;
    if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0 && root > 1) {
      return std::make_pair(root, k);
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Factors n >= 1 within the given budget. Deterministic in (n, effort).
inline Factorization factor(const BigInt& n, const FactorEffort& effort = {}) {
  if (n < 1) throw ValidationError("factor: n must be >= 1, got " + to_decimal(n));
  std::map<BigInt, unsigned> found;
  BigInt rest = n;

  if (effort.trial_bound >= 2) {
    if (effort.trial_bound > 4'000'000'000ULL) {
      throw ValidationError("factor: trial bound above 4e9 is not supported");
    }
    const auto table = detail::primes_up_to(effort.trial_bound);
    for (std::uint32_t p : *table) {
      if (rest == 1) break;
      if (fits_u64(rest) && static_cast<unsigned __int128>(p) * p > to_u64(rest)) {
        found[rest] += 1;  // no divisor up to its square root
        rest = 1;
        break;
      }
      if (mpz_divisible_ui_p(rest.get_mpz_t(), p) == 0) continue;
      unsigned e = 0;
      do {
        mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
        ++e;
      } while (mpz_divisible_ui_p(rest.get_mpz_t(), p) != 0);
      found[BigInt(p)] += e;
    }
  }

  BigInt cofactor = 1;
  std::mt19937_64 rng(effort.seed);
  std::vector<BigInt> pending;
  if (rest > 1) pending.push_back(rest);
  while (!pending.empty()) {
    BigInt v = std::move(pending.back());
    pending.pop_back();
    if (v == 1) continue;
    if (is_probable_prime(v)) {
      found[v] += 1;
      continue;
    }
    if (auto pw = detail::perfect_power(v)) {
      for (unsigned i = 0; i < pw->second; ++i) pending.push_back(pw->first);
      continue;
    }
    if (auto d = detail::brent_rho(v, effort.rho_cap, rng)) {
      pending.push_back(*d);
      pending.push_back(v / *d);
    } else {
      cofactor *= v;
    }
  }

  // Unsplit composites may still hide primes found on other branches.
  if (cofactor != 1) {
    for (auto& [p, e] : found) {
      while (mpz_divisible_p(cofactor.get_mpz_t(), p.get_mpz_t()) != 0) {
        mpz_divexact(cofactor.get_mpz_t(), cofactor.get_mpz_t(), p.get_mpz_t());
        ++e;
      }
    }
    if (is_probable_prime(cofactor)) {
      found[cofactor] += 1;
      cofactor = 1;
    }
  }

  Factorization out;
  out.cofactor = cofactor;
  out.factors.reserve(found.size());
  for (auto& [p, e] : found) out.factors.push_back({p, e});
  return out;
}

/// Concurrent memo for factor(): many readers, exclusive insertion.
class FactorMemo {
 public:
  explicit FactorMemo(FactorEffort effort = {}) : effort_(effort) {}

  const FactorEffort& effort() const { return effort_; }

  Factorization get(const BigInt& n) {
    const std::string key = n.get_str(16);
    {
      std::shared_lock lock(mu_);
      auto it = table_.find(key);
      if (it != table_.end()) return it->second;
    }
    Factorization f = factor(n, effort_);
    std::unique_lock lock(mu_);
    return table_.emplace(key, std::move(f)).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return table_.size();
  }

 private:
  FactorEffort effort_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Factorization> table_;
};

struct Radical {
  BigInt value;
  bool certain = true;
};

/// Product of the distinct primes. An unfactored cofactor is multiplied in
/// whole, which can only overstate the radical; certain is cleared then.
inline Radical radical(const Factorization& f) {
  Radical out{f.cofactor, f.certain()};
  for (const auto& pp : f.factors) out.value *= pp.prime;
  return out;
}

inline unsigned omega(const Factorization& f) {
  if (!f.certain()) throw UncertainFactorization();
  return static_cast<unsigned>(f.factors.size());
}

inline BigInt euler_phi(const Factorization& f) {
  if (!f.certain()) throw UncertainFactorization();
  BigInt out = 1;
  for (const auto& pp : f.factors) {
    out *= pow_ui(pp.prime, pp.exponent - 1) * (pp.prime - 1);
  }
  return out;
}

/// Number of unordered pairs a + b = n with gcd(a, b) = 1, which is phi(n)/2.
inline BigInt coprime_partition_count(const BigInt& n, const FactorEffort& effort = {}) {
  if (n < 3) {
    throw ValidationError("coprime_partition_count: n must be >= 3, got " + to_decimal(n));
  }
  const Factorization f = factor(n, effort);
  return euler_phi(f) / 2;
}

inline BigInt powmod(const BigInt& base, const BigInt& exp, const BigInt& modulus) {
  if (modulus < 1) throw ValidationError("powmod: modulus must be >= 1");
  if (base < 0 || exp < 0) throw ValidationError("powmod: base and exponent must be >= 0");
  BigInt out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), modulus.get_mpz_t());
  return out;
}

}  // namespace abcwb
