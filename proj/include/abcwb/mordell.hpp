#pragma once

// Exact rational points on y^2 = x^3 + A x + B in weighted projective
// coordinates: (X, Y, Z) stands for (X / Z^2, Y / Z^3) with Z > 0 and
// gcd(X, Z) = gcd(Y, Z) = 1. All arithmetic is over the integers; a raw
// result (X', Y', Z') is brought back to that form by removing the largest
// t with t | Z', t^2 | X', t^3 | Y'.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "abcwb/abc.hpp"
#include "abcwb/bigint.hpp"
#include "abcwb/errors.hpp"
#include "abcwb/numtheory.hpp"
#include "json.hpp"

namespace abcwb {

class Curve {
 public:
  Curve(BigInt a, BigInt b) : a_(std::move(a)), b_(std::move(b)) {
    if (discriminant_core() == 0) {
      throw ValidationError("singular curve: 4A^3 + 27B^2 = 0");
    }
  }

  /// y^2 = x^3 + d.
  static Curve mordell(BigInt d) { return Curve(BigInt(0), std::move(d)); }

  const BigInt& A() const { return a_; }
  const BigInt& B() const { return b_; }
  bool is_mordell() const { return a_ == 0; }

  BigInt discriminant() const { return -16 * discriminant_core(); }

  friend bool operator==(const Curve& l, const Curve& r) { return l.a_ == r.a_ && l.b_ == r.b_; }

 private:
  BigInt discriminant_core() const { return 4 * a_ * a_ * a_ + 27 * b_ * b_; }
  BigInt a_, b_;
};

class CurvePoint {
 public:
  static CurvePoint infinity() { return CurvePoint(); }

  /// Validates the structural invariants (Z > 0, coprimality); curve
  /// membership is a separate check.
  static CurvePoint make(BigInt x, BigInt y, BigInt z = 1) {
    if (z <= 0) throw ValidationError("point: Z must be positive");
    if (gcd(x, z) != 1 || gcd(y, z) != 1) {
      throw ValidationError("point: X and Y must each be coprime to Z");
    }
    return CurvePoint(std::move(x), std::move(y), std::move(z));
  }

  bool is_infinity() const { return infinity_; }
  const BigInt& X() const { return x_; }
  const BigInt& Y() const { return y_; }
  const BigInt& Z() const { return z_; }

  mpq_class x_affine() const { return canonical(mpq_class(x_, z_ * z_)); }
  mpq_class y_affine() const { return canonical(mpq_class(y_, z_ * z_ * z_)); }

  friend bool operator==(const CurvePoint& l, const CurvePoint& r) {
    if (l.infinity_ || r.infinity_) return l.infinity_ == r.infinity_;
    return l.x_ == r.x_ && l.y_ == r.y_ && l.z_ == r.z_;
  }

 private:
  CurvePoint() : infinity_(true), x_(0), y_(1), z_(1) {}
  CurvePoint(BigInt x, BigInt y, BigInt z)
      : infinity_(false), x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {}

  static mpq_class canonical(mpq_class q) {
    q.canonicalize();
    return q;
  }

  friend CurvePoint reduce_weighted(BigInt, BigInt, BigInt);

  bool infinity_;
  BigInt x_, y_, z_;
};

/// Brings raw weighted coordinates (X, Y, Z), Z != 0, to invariant form.
inline CurvePoint reduce_weighted(BigInt x, BigInt y, BigInt z) {
  // x = X / Z^2 in lowest terms has denominator Z^2 / g = Z_red^2.
  const BigInt z_sq = z * z;
  const BigInt g = gcd(x, z_sq);
  const BigInt den = z_sq / g;
  BigInt z_red;
  if (!exact_sqrt(den, z_red)) {
    throw std::logic_error("reduce_weighted: x denominator is not a square");
  }
  const BigInt t = z / z_red;  // carries the sign of z
  mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), BigInt(t * t).get_mpz_t());
  mpz_divexact(y.get_mpz_t(), y.get_mpz_t(), BigInt(t * t * t).get_mpz_t());
  return CurvePoint(std::move(x), std::move(y), std::move(z_red));
}

inline bool on_curve(const CurvePoint& p, const Curve& c) {
  if (p.is_infinity()) return true;
  const BigInt z2 = p.Z() * p.Z();
  const BigInt z4 = z2 * z2;
  return p.Y() * p.Y() == p.X() * p.X() * p.X() + c.A() * p.X() * z4 + c.B() * z4 * z2;
}

inline CurvePoint negate(const CurvePoint& p) {
  if (p.is_infinity()) return p;
  return CurvePoint::make(p.X(), -p.Y(), p.Z());
}

inline CurvePoint point_double(const CurvePoint& p, const Curve& c) {
  if (p.is_infinity() || p.Y() == 0) return CurvePoint::infinity();
  const BigInt z2 = p.Z() * p.Z();
  // lambda = M / (2 Y Z) with M = 3 X^2 + A Z^4
  const BigInt m = 3 * p.X() * p.X() + c.A() * z2 * z2;
  const BigInt y2 = p.Y() * p.Y();
  BigInt x3 = m * m - 8 * p.X() * y2;
  BigInt y3 = 4 * m * p.X() * y2 - m * x3 - 8 * y2 * y2;
  BigInt z3 = 2 * p.Y() * p.Z();
  return reduce_weighted(std::move(x3), std::move(y3), std::move(z3));
}

/// Unreduced x(P + Q) for P != +-Q: numerator S^2 - (x_P z_Q^2 + x_Q z_P^2) U^2
/// over denominator (U z_P z_Q)^2, where U = x_P z_Q^2 - x_Q z_P^2 and
/// S = y_P z_Q^3 - y_Q z_P^3. Pass negate(Q) for the difference.
struct RawSum {
  BigInt x_num;
  BigInt y_num;
  BigInt z;  // U z_P z_Q, may be negative; zero when x_P = x_Q
};

inline RawSum raw_sum(const CurvePoint& p, const CurvePoint& q) {
  const BigInt zp2 = p.Z() * p.Z();
  const BigInt zq2 = q.Z() * q.Z();
  const BigInt u = p.X() * zq2 - q.X() * zp2;
  const BigInt s = p.Y() * zq2 * q.Z() - q.Y() * zp2 * p.Z();
  const BigInt u2 = u * u;
  RawSum out;
  out.x_num = s * s - (p.X() * zq2 + q.X() * zp2) * u2;
  // y = lambda (x_P - x) - y_P over the common denominator Z^3.
  out.y_num = s * p.X() * u2 * zq2 - s * out.x_num - p.Y() * u2 * u * zq2 * q.Z();
  out.z = u * p.Z() * q.Z();
  return out;
}

inline CurvePoint add(const CurvePoint& p, const CurvePoint& q, const Curve& c) {
  if (p.is_infinity()) return q;
  if (q.is_infinity()) return p;
  RawSum r = raw_sum(p, q);
  if (r.z == 0) {
    // Same x: either Q = P (tangent) or Q = -P.
    if (p.Y() * q.Z() * q.Z() * q.Z() == q.Y() * p.Z() * p.Z() * p.Z()) return point_double(p, c);
    return CurvePoint::infinity();
  }
  return reduce_weighted(std::move(r.x_num), std::move(r.y_num), std::move(r.z));
}

inline CurvePoint sub(const CurvePoint& p, const CurvePoint& q, const Curve& c) {
  return add(p, negate(q), c);
}

inline CurvePoint scalar_mul(long long n, const CurvePoint& p, const Curve& c) {
  if (n == 0 || p.is_infinity()) return CurvePoint::infinity();
  CurvePoint base = n < 0 ? negate(p) : p;
  unsigned long long k = n < 0 ? 0ULL - static_cast<unsigned long long>(n)
                               : static_cast<unsigned long long>(n);
  CurvePoint acc = CurvePoint::infinity();
  while (k != 0) {
    if (k & 1ULL) acc = add(acc, base, c);
    k >>= 1ULL;
    if (k != 0) base = point_double(base, c);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Heights and growth.

/// max(log|X|, 2 log Z); 0 for the point at infinity.
inline long double naive_height(const CurvePoint& p) {
  if (p.is_infinity()) return 0;
  return std::max(log_abs(p.X()), 2 * log_abs(p.Z()));
}

struct HeightRow {
  long long n = 0;
  long double log_num = 0;           // log |X|
  long double log_den = 0;           // log Z^2
  std::optional<long double> ratio;  // log_num / log_den when both nonzero
  long double alpha = 0;             // log_num - log_den
  long double h = 0;
  long double h_over_n2 = 0;
};

struct HeightProfile {
  std::vector<HeightRow> rows;
  std::optional<long long> torsion_at;  // first n with nP = infinity
};

inline HeightProfile height_profile(const CurvePoint& p, const Curve& c, long long n_max) {
  if (!on_curve(p, c)) throw ValidationError("height_profile: point is not on the curve");
  if (n_max < 1) throw ValidationError("height_profile: n_max must be >= 1");
  HeightProfile out;
  CurvePoint multiple = CurvePoint::infinity();
  for (long long n = 1; n <= n_max; ++n) {
    multiple = add(multiple, p, c);
    if (multiple.is_infinity()) {
      out.torsion_at = n;
      break;
    }
    HeightRow row;
    row.n = n;
    row.log_num = log_abs(multiple.X());
    row.log_den = 2 * log_abs(multiple.Z());
    const bool defined = multiple.X() != 0 && abs(multiple.X()) != 1 && multiple.Z() != 1;
    if (defined) row.ratio = row.log_num / row.log_den;
    row.alpha = row.log_num - row.log_den;
    row.h = naive_height(multiple);
    row.h_over_n2 = row.h / static_cast<long double>(n * n);
    out.rows.push_back(row);
  }
  return out;
}

/// gamma with X / Z^2 = |X|^gamma; undefined unless |X| > 1.
inline std::optional<long double> growth_exponent(const CurvePoint& p) {
  if (p.is_infinity()) throw ValidationError("growth_exponent: point at infinity");
  if (abs(p.X()) <= 1) return std::nullopt;
  const long double lx = log_abs(p.X());
  return (lx - 2 * log_abs(p.Z())) / lx;
}

// ---------------------------------------------------------------------------
// Denominator predictor.

struct ZPrediction {
  BigInt raw;           // (x_P z_Q^2 - x_Q z_P^2) z_P z_Q
  BigInt reduced;       // Z of P + Q after reduction
  BigInt cancellation;  // |raw| / reduced
};

inline BigInt raw_denominator(const CurvePoint& p, const CurvePoint& q) {
  return (p.X() * q.Z() * q.Z() - q.X() * p.Z() * p.Z()) * p.Z() * q.Z();
}

inline ZPrediction z_predictor(const CurvePoint& p, const CurvePoint& q, const Curve& c) {
  if (p.is_infinity() || q.is_infinity()) throw ValidationError("z_predictor: point at infinity");
  ZPrediction out;
  out.raw = raw_denominator(p, q);
  if (out.raw == 0) throw DegenerateCase("z_predictor: P = +-Q, predicted denominator vanishes");
  out.reduced = add(p, q, c).Z();
  const BigInt mag = abs(out.raw);
  if (mpz_divisible_p(mag.get_mpz_t(), out.reduced.get_mpz_t()) == 0) {
    throw std::logic_error("z_predictor: reduced denominator does not divide the raw one");
  }
  out.cancellation = mag / out.reduced;
  return out;
}

// ---------------------------------------------------------------------------
// Triples from points on y^2 = x^3 + d: Y^2 = X^3 + d Z^6.

enum class Term { x_cubed, y_squared, d_z6 };

inline const char* term_name(Term t) {
  switch (t) {
    case Term::x_cubed: return "X^3";
    case Term::y_squared: return "Y^2";
    case Term::d_z6: return "dZ^6";
  }
  return "?";
}

struct RoleMap {
  Term a = Term::x_cubed;
  Term b = Term::d_z6;
  Term c = Term::y_squared;
  BigInt common_divisor = 1;
};

struct ExtractedTriple {
  AbcTriple triple;
  RoleMap roles;
};

/// The negative term of the signed identity X^3 + dZ^6 - Y^2 = 0 (at most
/// one of X^3, dZ^6 can be negative) moves across, so all terms are positive.
inline ExtractedTriple extract_triple(const CurvePoint& p, const Curve& c) {
  if (!c.is_mordell()) throw ValidationError("extract_triple: curve must have A = 0");
  if (p.is_infinity()) throw DegenerateCase("extract_triple: point at infinity");
  if (!on_curve(p, c)) throw ValidationError("extract_triple: point is not on the curve");
  if (p.X() == 0 || p.Y() == 0) throw DegenerateCase("extract_triple: zero term (X = 0 or Y = 0)");

  const BigInt z2 = p.Z() * p.Z();
  const BigInt x3 = p.X() * p.X() * p.X();
  const BigInt dz6 = c.B() * z2 * z2 * z2;
  const BigInt y2 = p.Y() * p.Y();

  struct Signed { BigInt v; Term t; };
  Signed lhs1{x3, Term::x_cubed}, lhs2{dz6, Term::d_z6}, rhs{y2, Term::y_squared};
  Signed first = lhs1, second = lhs2, sum = rhs;
  if (lhs1.v < 0) {
    first = {-lhs1.v, lhs1.t};
    second = rhs;
    sum = lhs2;
  } else if (lhs2.v < 0) {
    first = {-lhs2.v, lhs2.t};
    second = rhs;
    sum = lhs1;
  }
  const BigInt g = gcd(gcd(first.v, second.v), sum.v);
  BigInt a = first.v / g, b = second.v / g, s = sum.v / g;
  RoleMap roles;
  roles.common_divisor = g;
  roles.c = sum.t;
  if (a <= b) {
    roles.a = first.t;
    roles.b = second.t;
  } else {
    roles.a = second.t;
    roles.b = first.t;
  }
  return {AbcTriple::from_terms(std::move(a), std::move(b), std::move(s)), std::move(roles)};
}

// ---------------------------------------------------------------------------
// Log-space comparison of the extracted triple against rad(d X Y Z) and the
// dominant-term estimate 8 log|x_P| + log|x_P z_Q^2 - x_Q z_P^2|.

struct HeuristicReport {
  long double lhs = 0;          // log c of the extracted triple
  long double rhs_actual = 0;   // (1 + eps) log rad(d X Y Z)
  std::optional<long double> rhs_paper;  // undefined when x_P = 0 or P = +-Q
  long double gap = 0;          // lhs - rhs_actual
  bool certain = true;
};

template <typename Factorizer>
HeuristicReport heuristic_from(const CurvePoint& p, const CurvePoint& q, const CurvePoint& sum,
                               const AbcTriple& triple, const Curve& c, long double eps,
                               Factorizer&& factorize) {
  // Union of primes across d, X, Y, Z; cofactors multiply in whole.
  std::vector<BigInt> primes;
  BigInt cofactors = 1;
  bool certain = true;
  for (const BigInt* v : {&c.B(), &sum.X(), &sum.Y(), &sum.Z()}) {
    const Factorization f = factorize(abs(*v));
    for (const auto& pp : f.factors) primes.push_back(pp.prime);
    if (!f.certain()) {
      certain = false;
      cofactors *= f.cofactor;
    }
  }
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  BigInt rad = cofactors;
  for (const auto& pr : primes) rad *= pr;

  HeuristicReport out;
  out.certain = certain;
  out.lhs = log_abs(triple.c());
  out.rhs_actual = (1 + eps) * log_abs(rad);
  if (!p.is_infinity() && !q.is_infinity() && p.X() != 0) {
    const BigInt spread = p.X() * q.Z() * q.Z() - q.X() * p.Z() * p.Z();
    if (spread != 0) {
      out.rhs_paper = (1 + eps) * (8 * log_abs(p.X()) + log_abs(spread));
    }
  }
  out.gap = out.lhs - out.rhs_actual;
  return out;
}

inline HeuristicReport heuristic_report(const CurvePoint& p, const CurvePoint& q, long double eps,
                                        const Curve& c, const FactorEffort& effort = {}) {
  if (!c.is_mordell()) throw ValidationError("heuristic_report: curve must have A = 0");
  if (!on_curve(p, c) || !on_curve(q, c)) {
    throw ValidationError("heuristic_report: points must lie on the curve");
  }
  if (p.is_infinity() || q.is_infinity() || raw_denominator(p, q) == 0) {
    throw DegenerateCase("heuristic_report: P = +-Q");
  }
  const CurvePoint sum = add(p, q, c);
  const ExtractedTriple ex = extract_triple(sum, c);
  return heuristic_from(p, q, sum, ex.triple, c, eps,
                        [&](const BigInt& n) { return factor(n, effort); });
}

// ---------------------------------------------------------------------------

inline nlohmann::json point_json(const CurvePoint& p) {
  if (p.is_infinity()) return "infinity";
  return nlohmann::json::array({to_decimal(p.X()), to_decimal(p.Y()), to_decimal(p.Z())});
}

inline nlohmann::json curve_json(const Curve& c) {
  return {{"A", to_decimal(c.A())}, {"B", to_decimal(c.B())}};
}

/// Accepts decimal strings or JSON integers; floats are rejected.
inline BigInt json_integer(const nlohmann::json& v, const std::string& what) {
  if (v.is_string()) return parse_integer(v.get<std::string>());
  if (v.is_number_integer()) {
    return v.is_number_unsigned() ? from_u64(v.get<std::uint64_t>()) : BigInt(v.get<long>());
  }
  throw ValidationError(what + ": expected an integer (decimal string or JSON integer)");
}

inline CurvePoint point_from_json(const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "infinity") return CurvePoint::infinity();
  if (!v.is_array() || (v.size() != 2 && v.size() != 3)) {
    throw ValidationError("point: expected [X, Y] or [X, Y, Z]");
  }
  BigInt z = v.size() == 3 ? json_integer(v[2], "point Z") : BigInt(1);
  return CurvePoint::make(json_integer(v[0], "point X"), json_integer(v[1], "point Y"), std::move(z));
}

}  // namespace abcwb
