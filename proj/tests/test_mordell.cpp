#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "abcwb/mordell.hpp"

using namespace abcwb;

namespace {

// Affine rational oracle: chord and tangent on y^2 = x^3 + A x + B.
struct Affine {
  bool inf = true;
  mpq_class x, y;
};

Affine affine_add(const Affine& p, const Affine& q, const mpq_class& a) {
  if (p.inf) return q;
  if (q.inf) return p;
  mpq_class lambda;
  if (p.x == q.x) {
    if (p.y != q.y || p.y == 0) return Affine{};
    lambda = (3 * p.x * p.x + a) / (2 * p.y);
  } else {
    lambda = (q.y - p.y) / (q.x - p.x);
  }
  Affine r{false, 0, 0};
  r.x = lambda * lambda - p.x - q.x;
  r.y = lambda * (p.x - r.x) - p.y;
  return r;
}

Affine to_affine(const CurvePoint& p) {
  if (p.is_infinity()) return Affine{};
  return Affine{false, p.x_affine(), p.y_affine()};
}

CurvePoint from_affine(const Affine& p) {
  if (p.inf) return CurvePoint::infinity();
  // On a Weierstrass curve with integer coefficients the denominators are d^2, d^3.
  BigInt z;
  if (!exact_sqrt(p.x.get_den(), z)) throw std::logic_error("x denominator is not a square");
  return CurvePoint::make(p.x.get_num(), p.y.get_num() * z * z * z / p.y.get_den(), z);
}

mpq_class ratio(const BigInt& num, const BigInt& den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

bool same(const CurvePoint& p, const Affine& q) {
  if (p.is_infinity() || q.inf) return p.is_infinity() == q.inf;
  return p.x_affine() == q.x && p.y_affine() == q.y;
}

// Points m P + n Q built with the oracle only.
std::vector<Affine> oracle_pool(const Curve& c, const CurvePoint& p, const CurvePoint& q, int span) {
  const mpq_class a(c.A());
  const Affine ap = to_affine(p), aq = to_affine(q);
  std::vector<Affine> out;
  Affine row{};
  for (int m = 0; m <= span; ++m) {
    Affine cur = row;
    for (int n = 0; n <= span; ++n) {
      if (!cur.inf) out.push_back(cur);
      cur = affine_add(cur, aq, a);
    }
    row = affine_add(row, ap, a);
  }
  return out;
}

const Curve kB17 = Curve::mordell(17);
const Curve kBm2 = Curve::mordell(-2);
const CurvePoint kP17 = CurvePoint::make(-2, 3);
const CurvePoint kQ17 = CurvePoint::make(2, 5);
const CurvePoint kPm2 = CurvePoint::make(3, 5);

}  // namespace

TEST(Curve, RejectsSingular) {
  EXPECT_THROW(Curve::mordell(0), ValidationError);
  EXPECT_THROW(Curve(-3, 2), ValidationError);
  EXPECT_NO_THROW(Curve(-1, 0));
  EXPECT_EQ(kB17.discriminant(), -16 * 27 * 289);
}

TEST(CurvePoint, MakeValidates) {
  EXPECT_THROW(CurvePoint::make(1, 1, 0), ValidationError);
  EXPECT_THROW(CurvePoint::make(1, 1, -2), ValidationError);
  EXPECT_THROW(CurvePoint::make(4, 8, 2), ValidationError);  // gcd(X, Z) > 1
}

TEST(OnCurve, Examples) {
  EXPECT_TRUE(on_curve(kP17, kB17));
  EXPECT_TRUE(on_curve(kQ17, kB17));
  EXPECT_TRUE(on_curve(kPm2, kBm2));
  EXPECT_TRUE(on_curve(CurvePoint::infinity(), kB17));
  EXPECT_FALSE(on_curve(CurvePoint::make(1, 1), kB17));
  EXPECT_TRUE(on_curve(CurvePoint::make(1, -33, 2), kB17));
}

TEST(GroupLaw, Examples) {
  const CurvePoint sum = add(kP17, kQ17, kB17);
  EXPECT_EQ(sum, CurvePoint::make(1, -33, 2));
  EXPECT_EQ(sub(sum, kQ17, kB17), kP17);
  EXPECT_EQ(add(kP17, negate(kP17), kB17), CurvePoint::infinity());
  EXPECT_EQ(add(kP17, CurvePoint::infinity(), kB17), kP17);

  const CurvePoint twice = point_double(kPm2, kBm2);
  EXPECT_EQ(twice, CurvePoint::make(129, -383, 10));
  EXPECT_EQ(add(kPm2, kPm2, kBm2), twice);
  EXPECT_EQ(scalar_mul(2, kPm2, kBm2), twice);
  EXPECT_EQ(scalar_mul(0, kPm2, kBm2), CurvePoint::infinity());
  EXPECT_EQ(scalar_mul(-1, kPm2, kBm2), negate(kPm2));

  const CurvePoint thrice = scalar_mul(3, kPm2, kBm2);
  EXPECT_EQ(thrice.X(), 164323);
  EXPECT_EQ(thrice.Z(), 171);
}

TEST(GroupLaw, TwoTorsion) {
  const Curve c(-1, 0);
  const CurvePoint t = CurvePoint::make(1, 0);
  EXPECT_EQ(point_double(t, c), CurvePoint::infinity());
  EXPECT_EQ(scalar_mul(2, t, c), CurvePoint::infinity());
}

TEST(GroupLaw, MatchesAffineOracleOnRandomPairs) {
  struct Case { const Curve* c; CurvePoint p, q; };
  const std::vector<Case> cases = {
      {&kB17, kP17, kQ17},
      {&kBm2, kPm2, scalar_mul(2, kPm2, kBm2)},
  };
  std::mt19937_64 rng(1729);
  int checked = 0;
  for (const auto& cs : cases) {
    const auto pool = oracle_pool(*cs.c, cs.p, cs.q, 4);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int i = 0; i < 300; ++i) {
      const Affine& a1 = pool[pick(rng)];
      const Affine& a2 = pool[pick(rng)];
      const CurvePoint p1 = from_affine(a1), p2 = from_affine(a2);
      ASSERT_TRUE(on_curve(p1, *cs.c));
      const Affine expected = affine_add(a1, a2, mpq_class(cs.c->A()));
      const CurvePoint got = add(p1, p2, *cs.c);
      EXPECT_TRUE(same(got, expected));
      EXPECT_TRUE(on_curve(got, *cs.c));
      if (a1.x != a2.x) {
        // The unreduced integer sum carries the same x before cancellation.
        const RawSum raw = raw_sum(p1, p2);
        ASSERT_NE(raw.z, 0);
        EXPECT_EQ(ratio(raw.x_num, raw.z * raw.z), expected.x);
        EXPECT_EQ(ratio(raw.y_num, raw.z * raw.z * raw.z), expected.y);
        EXPECT_EQ(z_predictor(p1, p2, *cs.c).reduced, got.Z());
      }
      ++checked;
    }
  }
  EXPECT_GE(checked, 500);
}

TEST(GroupLaw, Axioms) {
  const auto pool = oracle_pool(kB17, kP17, kQ17, 2);
  std::vector<CurvePoint> pts{CurvePoint::infinity()};
  for (const auto& a : pool) pts.push_back(from_affine(a));
  for (const auto& p : pts) {
    EXPECT_EQ(add(p, negate(p), kB17), CurvePoint::infinity());
    for (const auto& q : pts) {
      EXPECT_EQ(add(p, q, kB17), add(q, p, kB17));
      EXPECT_TRUE(on_curve(add(p, q, kB17), kB17));
    }
  }
  for (std::size_t i = 0; i < pts.size(); i += 2) {
    for (std::size_t j = 1; j < pts.size(); j += 3) {
      for (std::size_t k = 0; k < pts.size(); k += 4) {
        const auto& a = pts[i];
        const auto& b = pts[j];
        const auto& c = pts[k];
        EXPECT_EQ(add(add(a, b, kB17), c, kB17), add(a, add(b, c, kB17), kB17));
      }
    }
  }
}

TEST(GroupLaw, ScalarDistributes) {
  for (long long m = 0; m <= 8; ++m) {
    for (long long n = 0; n <= 8; ++n) {
      EXPECT_EQ(add(scalar_mul(m, kPm2, kBm2), scalar_mul(n, kPm2, kBm2), kBm2),
                scalar_mul(m + n, kPm2, kBm2));
    }
  }
}

TEST(Height, NaiveHeight) {
  EXPECT_EQ(naive_height(CurvePoint::infinity()), 0.0L);
  EXPECT_NEAR(static_cast<double>(naive_height(kPm2)), std::log(3.0), 1e-15);
  EXPECT_NEAR(static_cast<double>(naive_height(CurvePoint::make(1, -33, 2))), std::log(4.0), 1e-15);
}

TEST(Height, ProfileExamples) {
  const HeightProfile prof = height_profile(kPm2, kBm2, 3);
  ASSERT_EQ(prof.rows.size(), 3U);
  EXPECT_FALSE(prof.torsion_at);
  EXPECT_FALSE(prof.rows[0].ratio);  // Z = 1
  ASSERT_TRUE(prof.rows[1].ratio);
  EXPECT_NEAR(static_cast<double>(*prof.rows[1].ratio), std::log(129.0) / std::log(100.0), 1e-12);
  EXPECT_NEAR(static_cast<double>(*prof.rows[1].ratio), 1.0553, 1e-4);
  EXPECT_NEAR(static_cast<double>(prof.rows[1].alpha), 0.2546, 1e-4);
  ASSERT_TRUE(prof.rows[2].ratio);
  EXPECT_NEAR(static_cast<double>(*prof.rows[2].ratio),
              std::log(164323.0) / (2 * std::log(171.0)), 1e-12);
  EXPECT_NEAR(static_cast<double>(*prof.rows[2].ratio), 1.168, 1e-3);
}

TEST(Height, QuadraticGrowth) {
  const HeightProfile prof = height_profile(kPm2, kBm2, 12);
  ASSERT_EQ(prof.rows.size(), 12U);
  const long double at10 = prof.rows[9].h_over_n2;
  const long double at12 = prof.rows[11].h_over_n2;
  EXPECT_NEAR(static_cast<double>(at12), 1.348, 5e-3);
  EXPECT_LT(std::fabs(static_cast<double>(at12 - at10)), 0.01);
  for (std::size_t i = 7; i < prof.rows.size(); ++i) {
    ASSERT_TRUE(prof.rows[i].ratio);
    EXPECT_GT(*prof.rows[i].ratio, 1.0L);
    EXPECT_LT(*prof.rows[i].ratio, 1.05L);
  }
}

TEST(Height, TorsionStops) {
  const Curve c(-1, 0);
  const HeightProfile prof = height_profile(CurvePoint::make(1, 0), c, 5);
  ASSERT_TRUE(prof.torsion_at);
  EXPECT_EQ(*prof.torsion_at, 2);
  EXPECT_EQ(prof.rows.size(), 1U);
}

TEST(Growth, Examples) {
  EXPECT_NEAR(static_cast<double>(*growth_exponent(scalar_mul(2, kPm2, kBm2))),
              (std::log(129.0) - std::log(100.0)) / std::log(129.0), 1e-12);
  EXPECT_NEAR(static_cast<double>(*growth_exponent(scalar_mul(2, kPm2, kBm2))), 0.0524, 1e-4);
  EXPECT_EQ(*growth_exponent(kPm2), 1.0L);
  EXPECT_FALSE(growth_exponent(CurvePoint::make(1, -33, 2)));
  EXPECT_THROW(growth_exponent(CurvePoint::infinity()), ValidationError);
}

TEST(ZPredictor, Examples) {
  const ZPrediction z = z_predictor(kP17, kQ17, kB17);
  EXPECT_EQ(z.raw, -4);
  EXPECT_EQ(z.reduced, 2);
  EXPECT_EQ(z.cancellation, 2);
  EXPECT_THROW(z_predictor(kP17, kP17, kB17), DegenerateCase);
  EXPECT_THROW(z_predictor(kP17, negate(kP17), kB17), DegenerateCase);
  EXPECT_THROW(z_predictor(kP17, CurvePoint::infinity(), kB17), ValidationError);
}

TEST(Extract, Examples) {
  const ExtractedTriple e = extract_triple(add(kP17, kQ17, kB17), kB17);
  EXPECT_EQ(e.triple, AbcTriple::from_terms(1, 1088, 1089));
  EXPECT_EQ(e.roles.a, Term::x_cubed);
  EXPECT_EQ(e.roles.b, Term::d_z6);
  EXPECT_EQ(e.roles.c, Term::y_squared);
  EXPECT_NEAR(static_cast<double>(quality(e.triple).quality), std::log(1089.0) / std::log(1122.0), 1e-12);
  EXPECT_NEAR(static_cast<double>(quality(e.triple).quality), 0.9957, 1e-4);

  const ExtractedTriple f = extract_triple(kPm2, kBm2);
  EXPECT_EQ(f.triple, AbcTriple::from_terms(2, 25, 27));
  EXPECT_EQ(f.roles.a, Term::d_z6);
  EXPECT_EQ(f.roles.c, Term::x_cubed);
  EXPECT_NEAR(static_cast<double>(quality(f.triple).quality), 0.969, 1e-3);

  const ExtractedTriple g = extract_triple(scalar_mul(2, kPm2, kBm2), kBm2);
  EXPECT_EQ(g.triple, AbcTriple::from_terms(146689, 2000000, 2146689));
}

TEST(Extract, NegativeXMovesAcross) {
  const ExtractedTriple e = extract_triple(kP17, kB17);  // -8 + 17 = 9
  EXPECT_EQ(e.triple, AbcTriple::from_terms(8, 9, 17));
  EXPECT_EQ(e.roles.c, Term::d_z6);
}

TEST(Extract, Degenerate) {
  EXPECT_THROW(extract_triple(CurvePoint::infinity(), kB17), DegenerateCase);
  EXPECT_THROW(extract_triple(CurvePoint::make(1, 0), Curve(-1, 0)), ValidationError);
  EXPECT_THROW(extract_triple(CurvePoint::make(-1, 0), Curve::mordell(1)), DegenerateCase);
  EXPECT_THROW(extract_triple(CurvePoint::make(1, 1), kB17), ValidationError);
}

TEST(Heuristic, Examples) {
  const HeuristicReport one = heuristic_report(kP17, kQ17, 1, kB17);
  EXPECT_TRUE(one.certain);
  EXPECT_NEAR(static_cast<double>(one.lhs), std::log(1089.0), 1e-12);
  EXPECT_NEAR(static_cast<double>(one.rhs_actual), 2 * std::log(1122.0), 1e-12);
  ASSERT_TRUE(one.rhs_paper);
  EXPECT_NEAR(static_cast<double>(*one.rhs_paper), 2 * (8 * std::log(2.0) + std::log(4.0)), 1e-12);

  const HeuristicReport zero = heuristic_report(kP17, kQ17, 0, kB17);
  EXPECT_NEAR(static_cast<double>(zero.gap), std::log(1089.0 / 1122.0), 1e-12);
  EXPECT_NEAR(static_cast<double>(zero.gap), -0.0299, 1e-4);

  EXPECT_THROW(heuristic_report(kP17, kP17, 0, kB17), DegenerateCase);
  EXPECT_THROW(heuristic_report(kP17, CurvePoint::make(1, 1), 0, kB17), ValidationError);
}

TEST(Json, PointRoundTrip) {
  const CurvePoint p = CurvePoint::make(1, -33, 2);
  EXPECT_EQ(point_from_json(point_json(p)), p);
  EXPECT_EQ(point_from_json(point_json(CurvePoint::infinity())), CurvePoint::infinity());
  EXPECT_EQ(point_from_json(nlohmann::json::parse("[3, 5]")), kPm2);
  EXPECT_THROW(point_from_json(nlohmann::json::parse("[3.5, 5]")), ValidationError);
  EXPECT_THROW(point_from_json(nlohmann::json::parse("[3]")), ValidationError);
}
