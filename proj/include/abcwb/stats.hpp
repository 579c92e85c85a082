#pragma once

// omega(n) census against the normal law with mean and variance log log,
// the exceptional-set density and quality histograms.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "abcwb/errors.hpp"

namespace abcwb {

inline constexpr std::uint64_t kDefaultSieveCeiling = 10'000'000;
inline constexpr std::uint64_t kCensusStart = 3;  // log log n <= 0 below e

/// omega(n) for every 0 <= n <= limit via a smallest-prime-factor sieve.
class OmegaSieve {
 public:
  explicit OmegaSieve(std::uint64_t limit) : omega_(limit + 1, 0) {
    std::vector<std::uint32_t> spf(limit + 1, 0);
    for (std::uint64_t i = 2; i <= limit; ++i) {
      if (spf[i] != 0) continue;
      for (std::uint64_t j = i; j <= limit; j += i) {
        if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
      }
    }
    for (std::uint64_t n = 2; n <= limit; ++n) {
      const std::uint64_t rest = n / spf[n];
      omega_[n] = static_cast<std::uint8_t>(omega_[rest] + (spf[rest] == spf[n] ? 0 : 1));
    }
  }

  std::uint64_t limit() const { return omega_.size() - 1; }
  unsigned operator[](std::uint64_t n) const { return omega_[n]; }

 private:
  std::vector<std::uint8_t> omega_;
};

struct OmegaCensus {
  std::uint64_t x = 0;
  double mean = 0;
  double stddev = 0;  // population deviation around the mean
  double loglog_x = 0;
  std::map<unsigned, std::uint64_t> histogram;  // omega value -> count over [3, x]

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : histogram) t += v;
    return t;
  }
};

inline void check_census_range(std::uint64_t x, std::uint64_t ceiling) {
  if (x < 10) throw ValidationError("census: x must be >= 10");
  if (x > ceiling) throw ValidationError("census: x exceeds the sieve ceiling");
}

inline OmegaCensus census_from_sieve(const OmegaSieve& sieve, std::uint64_t x) {
  if (x > sieve.limit()) throw ValidationError("census: x exceeds the sieve");
  OmegaCensus out;
  out.x = x;
  out.loglog_x = std::log(std::log(static_cast<double>(x)));
  std::uint64_t sum = 0;
  for (std::uint64_t n = kCensusStart; n <= x; ++n) {
    ++out.histogram[sieve[n]];
    sum += sieve[n];
  }
  const std::uint64_t count = x - kCensusStart + 1;
  out.mean = static_cast<double>(sum) / static_cast<double>(count);
  double sq = 0;
  for (const auto& [k, v] : out.histogram) {
    const double d = static_cast<double>(k) - out.mean;
    sq += d * d * static_cast<double>(v);
  }
  out.stddev = std::sqrt(sq / static_cast<double>(count));
  return out;
}

inline OmegaCensus omega_census(std::uint64_t x, std::uint64_t ceiling = kDefaultSieveCeiling) {
  check_census_range(x, ceiling);
  return census_from_sieve(OmegaSieve(x), x);
}

enum class Centering {
  upper_limit,  // |omega(n) - log log x| against (log log x)^(1/2 + eps)
  per_n,        // |omega(n) - log log n| against (log log n)^(1/2 + eps)
};

inline double density_from_sieve(const OmegaSieve& sieve, std::uint64_t x, double eps,
                                 Centering centering = Centering::upper_limit) {
  if (!(eps > -0.5)) throw ValidationError("exceptional_density: eps must be > -1/2");
  if (x > sieve.limit()) throw ValidationError("exceptional_density: x exceeds the sieve");
  const double loglog_x = std::log(std::log(static_cast<double>(x)));
  std::uint64_t exceptional = 0;
  for (std::uint64_t n = kCensusStart; n <= x; ++n) {
    const double center =
        centering == Centering::upper_limit ? loglog_x : std::log(std::log(static_cast<double>(n)));
    if (std::abs(static_cast<double>(sieve[n]) - center) > std::pow(center, 0.5 + eps)) {
      ++exceptional;
    }
  }
  return static_cast<double>(exceptional) / static_cast<double>(x - kCensusStart + 1);
}

inline double exceptional_density(std::uint64_t x, double eps,
                                  Centering centering = Centering::upper_limit,
                                  std::uint64_t ceiling = kDefaultSieveCeiling) {
  check_census_range(x, ceiling);
  return density_from_sieve(OmegaSieve(x), x, eps, centering);
}

// ---------------------------------------------------------------------------

struct QualityHistogram {
  double bin_width = 0;
  std::map<long long, std::uint64_t> bins;  // bin index k covers [k w, (k+1) w)
  std::uint64_t uncertain = 0;

  double bin_lower(long long k) const { return static_cast<double>(k) * bin_width; }
};

struct QualitySample {
  double quality = 0;
  bool certain = true;
};

inline QualityHistogram quality_histogram(const std::vector<QualitySample>& samples,
                                          double bin_width) {
  if (!(bin_width > 0)) throw ValidationError("quality_histogram: bin width must be > 0");
  QualityHistogram out;
  out.bin_width = bin_width;
  for (const auto& s : samples) {
    if (!s.certain) {
      ++out.uncertain;
      continue;
    }
    // Small nudge so that 1.1 / 0.1 lands in bin 11, not 10.999...
    const auto k = static_cast<long long>(std::floor(s.quality / bin_width + 1e-9));
    ++out.bins[k];
  }
  return out;
}

}  // namespace abcwb
