#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process:
// run_cli(argc, argv, out, err) returns the process exit status.
//
// Exit codes: 0 ok, 2 usage, 3 validation failure, 4 internal error.
// Data goes to `out`, diagnostics to `err`.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "abcwb/abc.hpp"
#include "abcwb/hunt.hpp"
#include "abcwb/mordell.hpp"
#include "abcwb/numtheory.hpp"
#include "abcwb/stats.hpp"
#include "json.hpp"

#ifndef ABCWB_VERSION
#define ABCWB_VERSION "0.0.0"
#endif

namespace abcwb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitInternal = 4;

using nlohmann::json;

inline std::string fmt_real(long double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string fmt_sci(long double v, int digits = 6) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(digits) << v;
  return os.str();
}

inline json opt_real(const std::optional<long double>& v) {
  return v ? json(static_cast<double>(*v)) : json(nullptr);
}

/// Command name, every parameter as given (or defaulted), seed and version.
inline json make_manifest(const CLI::App& sub, std::uint64_t seed) {
  json params = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    std::string key = opt->get_name(false, true);
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (opt->count() > 0) {
      const auto& res = opt->results();
      params[key] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (!opt->get_default_str().empty()) {
      params[key] = opt->get_default_str();
    }
  }
  return {{"command", sub.get_name()},
          {"parameters", params},
          {"seed", seed},
          {"version", ABCWB_VERSION}};
}

struct EffortOptions {
  FactorEffort effort;
  void attach(CLI::App* sub) {
    sub->add_option("--trial-bound", effort.trial_bound, "Trial-division bound")->capture_default_str();
    sub->add_option("--rho-cap", effort.rho_cap, "Pollard rho iteration cap per composite")
        ->capture_default_str();
    sub->add_option("--seed", effort.seed, "Seed for rho starting values")->capture_default_str();
  }
};

inline json factorization_json(const Factorization& f) {
  json factors = json::array();
  for (const auto& pp : f.factors) factors.push_back({to_decimal(pp.prime), pp.exponent});
  return {{"factors", factors}, {"cofactor", to_decimal(f.cofactor)}, {"certain", f.certain()}};
}

inline std::string factorization_text(const Factorization& f) {
  std::string s;
  for (const auto& pp : f.factors) {
    if (!s.empty()) s += " * ";
    s += to_decimal(pp.prime);
    if (pp.exponent > 1) s += "^" + std::to_string(pp.exponent);
  }
  if (f.cofactor != 1) s += (s.empty() ? "" : " * ") + std::string("[") + to_decimal(f.cofactor) + "]";
  return s.empty() ? "1" : s;
}

inline json quality_json(const QualityReport& q) {
  return {{"rad", to_decimal(q.radical)},
          {"quality", static_cast<double>(q.quality)},
          {"certain", q.certain},
          {"c_exceeds_rad", q.exceeds_radical}};
}

// Curve + points either from a JSON file {A, B, points} or inline flags.
struct CurveInput {
  std::string config;
  std::string a = "0";
  std::string b;
  std::vector<std::string> points;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "JSON file with {A, B, points: [[X,Y,Z],...]}");
    sub->add_option("--A", a, "Curve coefficient A (decimal)")->capture_default_str();
    sub->add_option("--B", b, "Curve coefficient B (decimal)");
    sub->add_option("--point", points, "Point as X,Y[,Z] (repeatable)");
  }

  std::pair<Curve, std::vector<CurvePoint>> resolve() const {
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw ValidationError("cannot open config " + config);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
      }
      if (!j.contains("B") || !j.contains("points")) throw ValidationError("config needs B and points");
      Curve curve(j.contains("A") ? json_integer(j["A"], "A") : BigInt(0), json_integer(j["B"], "B"));
      std::vector<CurvePoint> pts;
      for (const auto& p : j["points"]) pts.push_back(point_from_json(p));
      return {curve, pts};
    }
    if (b.empty()) throw ValidationError("either --config or --B is required");
    Curve curve(parse_integer(a), parse_integer(b));
    std::vector<CurvePoint> pts;
    for (const auto& text : points) {
      std::vector<std::string> parts;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) parts.push_back(item);
      if (parts.size() != 2 && parts.size() != 3) throw ValidationError("point must be X,Y or X,Y,Z");
      pts.push_back(CurvePoint::make(parse_integer(parts[0]), parse_integer(parts[1]),
                                     parts.size() == 3 ? parse_integer(parts[2]) : BigInt(1)));
    }
    return {curve, pts};
  }
};

inline const CurvePoint& pick(const std::vector<CurvePoint>& pts, std::size_t i) {
  if (i >= pts.size()) throw ValidationError("point index " + std::to_string(i) + " out of range");
  return pts[i];
}

inline std::string point_text(const CurvePoint& p) {
  if (p.is_infinity()) return "infinity";
  return "(" + to_decimal(p.X()) + ", " + to_decimal(p.Y()) + ", " + to_decimal(p.Z()) + ")";
}

inline std::int64_t data_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      return std::stoll(env);
    } catch (const std::exception&) {
      throw ValidationError("SOURCE_DATE_EPOCH is not an integer");
    }
  }
  return 0;
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline void write_manifest_file(const std::string& data_path, json manifest) {
  manifest["outputs"] = json::array({data_path});
  std::ofstream out(data_path + ".manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest for " + data_path);
  out << manifest.dump(2) << "\n";
}

inline void print_records_table(std::ostream& out, const std::vector<TripleRecord>& recs,
                                bool rank_column) {
  out << (rank_column ? "rank  " : "") << "n  m  s  quality     certain  c_digits  gap        raw_Z -> reduced_Z (cancel)\n";
  std::size_t rank = 0;
  for (const auto& r : recs) {
    ++rank;
    if (rank_column) out << std::left << std::setw(6) << rank;
    out << std::left << std::setw(3) << r.n << std::setw(3) << r.m << std::setw(3)
        << sign_char(r.sign) << std::setw(12)
        << ((r.quality.certain ? "" : ">=") + fmt_real(r.quality.quality, 6)) << std::setw(9)
        << (r.quality.certain ? "yes" : "no*") << std::setw(10) << decimal_digits(r.triple.c())
        << std::setw(11) << fmt_real(r.heuristic.gap, 4) << to_decimal(r.raw_Z) << " -> "
        << to_decimal(r.reduced_Z) << " (" << to_decimal(r.cancellation) << ")\n";
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"abc-triple, Mordell-curve and omega-statistics workbench", "abcwb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ABCWB_VERSION));
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable JSON output");

  std::function<void()> action;

  // rad N
  std::string rad_n;
  EffortOptions rad_effort;
  auto* rad_cmd = app.add_subcommand("rad", "Radical of N with certainty flag");
  rad_cmd->add_option("N", rad_n, "Integer >= 1 (decimal)")->required();
  rad_effort.attach(rad_cmd);
  rad_cmd->callback([&] {
    action = [&] {
      const BigInt n = parse_natural(rad_n);
      const Factorization f = factor(n, rad_effort.effort);
      const Radical r = radical(f);
      if (as_json) {
        out << json{{"manifest", make_manifest(*rad_cmd, rad_effort.effort.seed)},
                    {"n", rad_n},
                    {"rad", to_decimal(r.value)},
                    {"certain", r.certain},
                    {"factorization", factorization_json(f)}}
                   .dump()
            << "\n";
      } else {
        out << to_decimal(r.value) << (r.certain ? "" : "  (upper bound, uncertain)") << "\n";
        out << "factorization: " << factorization_text(f) << "\n";
      }
    };
  });

  // quality A B
  std::string qa, qb;
  EffortOptions q_effort;
  auto* q_cmd = app.add_subcommand("quality", "Quality log c / log rad(abc) of a + b = c");
  q_cmd->add_option("A", qa, "First term (decimal)")->required();
  q_cmd->add_option("B", qb, "Second term (decimal)")->required();
  q_effort.attach(q_cmd);
  q_cmd->callback([&] {
    action = [&] {
      const AbcTriple t = make_triple(parse_natural(qa), parse_natural(qb));
      const QualityReport q = quality(t, q_effort.effort);
      if (as_json) {
        json j = triple_json(t, q, "cli");
        j["manifest"] = make_manifest(*q_cmd, q_effort.effort.seed);
        j["c_exceeds_rad"] = q.exceeds_radical;
        out << j.dump() << "\n";
      } else {
        out << "triple   " << to_decimal(t.a()) << " + " << to_decimal(t.b()) << " = "
            << to_decimal(t.c()) << "\n";
        out << "rad      " << to_decimal(q.radical) << (q.certain ? "" : " (upper bound)") << "\n";
        out << "quality  " << (q.certain ? "" : ">= ") << fmt_real(q.quality, 6) << "\n";
      }
    };
  });

  // inequality A B
  std::string ia, ib;
  BoundParams iparams;
  EffortOptions i_effort;
  auto* i_cmd = app.add_subcommand("inequality", "Compare c with c_eps * rad(abc)^(1+eps)");
  i_cmd->add_option("A", ia)->required();
  i_cmd->add_option("B", ib)->required();
  i_cmd->add_option("--eps", iparams.epsilon, "epsilon >= 0")->capture_default_str();
  i_cmd->add_option("--c-eps", iparams.c_epsilon, "constant c_eps > 0")->capture_default_str();
  i_effort.attach(i_cmd);
  i_cmd->callback([&] {
    action = [&] {
      const AbcTriple t = make_triple(parse_natural(ia), parse_natural(ib));
      const InequalityReport r = abc_inequality_check(t, iparams, i_effort.effort);
      if (as_json) {
        out << json{{"manifest", make_manifest(*i_cmd, i_effort.effort.seed)},
                    {"lhs", to_decimal(r.lhs)},
                    {"log_lhs", static_cast<double>(r.log_lhs)},
                    {"log_rhs", static_cast<double>(r.log_rhs)},
                    {"satisfied", r.satisfied},
                    {"certain", r.certain}}
                   .dump()
            << "\n";
      } else {
        out << "log c                   " << fmt_real(r.log_lhs) << "\n";
        out << "log(c_eps rad^(1+eps))  " << fmt_real(r.log_rhs) << "\n";
        out << (r.satisfied ? "satisfied" : "exceeded") << (r.certain ? "" : " (uncertain radical)")
            << "\n";
      }
    };
  });

  // family
  std::string fp, fq;
  unsigned f_nmax = 1;
  bool f_verify = false;
  std::size_t f_digit_cap = kDefaultFamilyDigitCap;
  auto* f_cmd = app.add_subcommand("family", "Triples 1 + (p^(q^(n-1)(q-1)) - 1) = p^(q^(n-1)(q-1))");
  f_cmd->add_option("--p", fp, "Base p >= 2")->required();
  f_cmd->add_option("--q", fq, "Prime q coprime to p")->required();
  f_cmd->add_option("--n-max", f_nmax, "Largest n")->required();
  f_cmd->add_flag("--verify", f_verify, "Check q^n | a_n by modular exponentiation");
  f_cmd->add_option("--digit-cap", f_digit_cap, "Skip c_n above this many digits")->capture_default_str();
  f_cmd->callback([&] {
    action = [&] {
      const BigInt p = parse_natural(fp), q = parse_natural(fq);
      const FamilyResult fam = family_fermat(p, q, f_nmax, f_digit_cap);
      json rows = json::array();
      for (const auto& mem : fam.members) {
        json row = {{"n", mem.n},
                    {"a", to_decimal(mem.triple.a())},
                    {"b", to_decimal(mem.triple.b())},
                    {"c", to_decimal(mem.triple.c())},
                    {"c_digits", decimal_digits(mem.triple.c())}};
        if (f_verify) row["divisible"] = verify_family_divisibility(p, q, mem.n);
        rows.push_back(row);
      }
      if (as_json) {
        out << json{{"manifest", make_manifest(*f_cmd, 0)}, {"triples", rows}, {"skipped", fam.skipped}}
                   .dump()
            << "\n";
        return;
      }
      for (const auto& row : rows) {
        const std::string b = row["b"].get<std::string>();
        const std::string c = row["c"].get<std::string>();
        out << "n=" << row["n"].get<unsigned>() << "  " << row["a"].get<std::string>() << " + "
            << (b.size() > 40 ? b.substr(0, 20) + "..." : b) << " = "
            << (c.size() > 40 ? c.substr(0, 20) + "..." : c) << "  [" << row["c_digits"].get<std::size_t>()
            << " digits]";
        if (f_verify) out << (row["divisible"].get<bool>() ? "  q^n | a_n: yes" : "  q^n | a_n: NO");
        out << "\n";
      }
      for (unsigned n : fam.skipped) err << "skipped n=" << n << " (exceeds digit cap)\n";
    };
  });

  // bounds
  std::string b_n;
  long double b_delta = 0, b_c1 = 1;
  std::string b_c;
  std::string b_placement = "printed";
  auto* b_cmd = app.add_subcommand("bounds", "Lower-bound curve and log of the exponential upper bound");
  b_cmd->add_option("--N", b_n, "Radical N (decimal)")->required();
  b_cmd->add_option("--delta", b_delta, "delta in [0, 4]")->capture_default_str();
  b_cmd->add_option("--c1", b_c1, "Constant c1 > 0")->capture_default_str();
  b_cmd->add_option("--c", b_c, "Compare a value c against both bounds");
  b_cmd->add_option("--sqrt", b_placement, "Square root over log N only (printed) or the whole quotient")
      ->check(CLI::IsMember({"printed", "quotient"}))
      ->capture_default_str();
  b_cmd->callback([&] {
    action = [&] {
      const BigInt n = parse_natural(b_n);
      const auto placement =
          b_placement == "printed" ? SqrtPlacement::log_only : SqrtPlacement::whole_quotient;
      std::optional<long double> st_log;
      if (n >= 16) st_log = st_lower_bound_log(n, b_delta, placement);
      const long double sy_log = sy_upper_bound_log(n, b_c1);
      json j = {{"manifest", make_manifest(*b_cmd, 0)},
                {"N", b_n},
                {"st_lower_log", opt_real(st_log)},
                {"st_lower", st_log ? json(static_cast<double>(std::exp(*st_log))) : json(nullptr)},
                {"sy_upper_log", static_cast<double>(sy_log)}};
      std::optional<long double> log_c;
      if (!b_c.empty()) {
        log_c = log_abs(parse_natural(b_c));
        j["log_c"] = static_cast<double>(*log_c);
        j["exceeds_lower"] = st_log ? json(*log_c > *st_log) : json(nullptr);
        j["below_upper"] = *log_c < sy_log;
      }
      if (as_json) {
        out << j.dump() << "\n";
        return;
      }
      if (st_log) {
        out << "lower bound N exp(...)   " << fmt_sci(std::exp(*st_log), 4) << "  (log " << fmt_real(*st_log) << ")\n";
      } else {
        out << "lower bound              undefined for N < 16\n";
      }
      out << "upper bound exponent     " << fmt_sci(sy_log, 4) << "\n";
      if (log_c) {
        if (st_log) out << "c exceeds lower bound    " << (*log_c > *st_log ? "yes" : "no") << "\n";
        out << "c below upper bound      " << (*log_c < sy_log ? "yes" : "no") << "\n";
      }
    };
  });

  // curve
  auto* c_cmd = app.add_subcommand("curve", "Point arithmetic on y^2 = x^3 + A x + B");
  c_cmd->require_subcommand(1);
  CurveInput cin_check, cin_add, cin_mul, cin_profile, cin_growth, cin_extract, cin_heur;
  auto* cc_check = c_cmd->add_subcommand("check", "Check that points lie on the curve");
  cin_check.attach(cc_check);
  cc_check->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_check.resolve();
      json rows = json::array();
      for (const auto& p : pts) rows.push_back({{"point", point_json(p)}, {"on_curve", on_curve(p, curve)}});
      if (as_json) {
        out << json{{"manifest", make_manifest(*cc_check, 0)}, {"curve", curve_json(curve)}, {"points", rows}}
                   .dump()
            << "\n";
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          out << point_text(pts[i]) << "  " << (on_curve(pts[i], curve) ? "on curve" : "NOT on curve") << "\n";
        }
      }
    };
  });

  std::size_t add_i = 0, add_j = 1;
  bool add_sub = false;
  auto* cc_add = c_cmd->add_subcommand("add", "P + Q (or P - Q with --sub)");
  cin_add.attach(cc_add);
  cc_add->add_option("--i", add_i, "Index of P")->capture_default_str();
  cc_add->add_option("--j", add_j, "Index of Q")->capture_default_str();
  cc_add->add_flag("--sub", add_sub, "Compute P - Q");
  cc_add->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_add.resolve();
      const CurvePoint& p = pick(pts, add_i);
      const CurvePoint& q = pick(pts, add_j);
      if (!on_curve(p, curve) || !on_curve(q, curve)) throw ValidationError("points must lie on the curve");
      const CurvePoint r = add_sub ? sub(p, q, curve) : add(p, q, curve);
      std::optional<ZPrediction> z;
      if (!p.is_infinity() && !q.is_infinity() && raw_denominator(p, q) != 0) {
        z = z_predictor(p, add_sub ? negate(q) : q, curve);
      }
      if (as_json) {
        json j = {{"manifest", make_manifest(*cc_add, 0)}, {"curve", curve_json(curve)}, {"result", point_json(r)}};
        if (z) j["z"] = {{"raw", to_decimal(z->raw)}, {"reduced", to_decimal(z->reduced)}, {"cancellation", to_decimal(z->cancellation)}};
        out << j.dump() << "\n";
      } else {
        out << point_text(r) << "\n";
        if (z) {
          out << "raw Z " << to_decimal(z->raw) << ", reduced " << to_decimal(z->reduced)
              << ", cancellation " << to_decimal(z->cancellation) << "\n";
        }
      }
    };
  });

  long long mul_n = 1;
  std::size_t mul_i = 0;
  auto* cc_mul = c_cmd->add_subcommand("mul", "n * P");
  cin_mul.attach(cc_mul);
  cc_mul->add_option("--n", mul_n, "Multiplier (may be negative)")->required();
  cc_mul->add_option("--i", mul_i, "Index of P")->capture_default_str();
  cc_mul->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_mul.resolve();
      const CurvePoint& p = pick(pts, mul_i);
      if (!on_curve(p, curve)) throw ValidationError("point must lie on the curve");
      const CurvePoint r = scalar_mul(mul_n, p, curve);
      if (as_json) {
        out << json{{"manifest", make_manifest(*cc_mul, 0)}, {"curve", curve_json(curve)}, {"result", point_json(r)}}
                   .dump()
            << "\n";
      } else {
        out << point_text(r) << "\n";
      }
    };
  });

  long long prof_n = 12;
  std::size_t prof_i = 0;
  auto* cc_prof = c_cmd->add_subcommand("profile", "Height profile of nP for n = 1..n-max");
  cin_profile.attach(cc_prof);
  cc_prof->add_option("--n-max", prof_n, "Largest multiple")->capture_default_str();
  cc_prof->add_option("--i", prof_i, "Index of P")->capture_default_str();
  cc_prof->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_profile.resolve();
      const HeightProfile hp = height_profile(pick(pts, prof_i), curve, prof_n);
      if (as_json) {
        json rows = json::array();
        for (const auto& r : hp.rows) {
          rows.push_back({{"n", r.n},
                          {"log_num", static_cast<double>(r.log_num)},
                          {"log_den", static_cast<double>(r.log_den)},
                          {"ratio", opt_real(r.ratio)},
                          {"alpha", static_cast<double>(r.alpha)},
                          {"h", static_cast<double>(r.h)},
                          {"h_over_n2", static_cast<double>(r.h_over_n2)}});
        }
        out << json{{"manifest", make_manifest(*cc_prof, 0)},
                    {"curve", curve_json(curve)},
                    {"rows", rows},
                    {"torsion_at", hp.torsion_at ? json(*hp.torsion_at) : json(nullptr)}}
                   .dump()
            << "\n";
        return;
      }
      out << "n    log|X|       log Z^2      ratio      alpha        h            h/n^2\n";
      for (const auto& r : hp.rows) {
        out << std::left << std::setw(5) << r.n << std::setw(13) << fmt_real(r.log_num, 4)
            << std::setw(13) << fmt_real(r.log_den, 4) << std::setw(11)
            << (r.ratio ? fmt_real(*r.ratio, 4) : std::string("undef")) << std::setw(13)
            << fmt_real(r.alpha, 4) << std::setw(13) << fmt_real(r.h, 4) << fmt_real(r.h_over_n2, 4)
            << "\n";
      }
      if (hp.torsion_at) err << "nP reached infinity at n=" << *hp.torsion_at << " (torsion point)\n";
    };
  });

  auto* cc_growth = c_cmd->add_subcommand("growth", "Growth exponent gamma of each point");
  cin_growth.attach(cc_growth);
  cc_growth->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_growth.resolve();
      json rows = json::array();
      for (const auto& p : pts) rows.push_back({{"point", point_json(p)}, {"gamma", opt_real(growth_exponent(p))}});
      if (as_json) {
        out << json{{"manifest", make_manifest(*cc_growth, 0)}, {"curve", curve_json(curve)}, {"points", rows}}
                   .dump()
            << "\n";
      } else {
        for (const auto& p : pts) {
          const auto g = growth_exponent(p);
          out << point_text(p) << "  gamma " << (g ? fmt_real(*g) : std::string("undefined")) << "\n";
        }
      }
    };
  });

  EffortOptions ex_effort;
  std::size_t ex_i = 0;
  auto* cc_extract = c_cmd->add_subcommand("extract", "abc triple from a point on y^2 = x^3 + d");
  cin_extract.attach(cc_extract);
  cc_extract->add_option("--i", ex_i, "Index of the point")->capture_default_str();
  ex_effort.attach(cc_extract);
  cc_extract->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_extract.resolve();
      const CurvePoint& p = pick(pts, ex_i);
      const ExtractedTriple ex = extract_triple(p, curve);
      const QualityReport q = quality(ex.triple, ex_effort.effort);
      json roles = {{"a", term_name(ex.roles.a)}, {"b", term_name(ex.roles.b)}, {"c", term_name(ex.roles.c)},
                    {"gcd", to_decimal(ex.roles.common_divisor)}};
      if (as_json) {
        json j = triple_json(ex.triple, q, {{"point", point_json(p)}, {"B", to_decimal(curve.B())}, {"roles", roles}});
        j["manifest"] = make_manifest(*cc_extract, ex_effort.effort.seed);
        out << j.dump() << "\n";
      } else {
        out << to_decimal(ex.triple.a()) << " + " << to_decimal(ex.triple.b()) << " = "
            << to_decimal(ex.triple.c()) << "\n";
        out << "roles a=" << term_name(ex.roles.a) << " b=" << term_name(ex.roles.b)
            << " c=" << term_name(ex.roles.c) << " gcd=" << to_decimal(ex.roles.common_divisor) << "\n";
        out << "rad " << to_decimal(q.radical) << "  quality " << fmt_real(q.quality, 6)
            << (q.certain ? "" : " (lower bound)") << "\n";
      }
    };
  });

  EffortOptions he_effort;
  long double he_eps = 0;
  std::size_t he_i = 0, he_j = 1;
  auto* cc_heur = c_cmd->add_subcommand("heuristic", "Compare log c of P+Q's triple with the radical estimates");
  cin_heur.attach(cc_heur);
  cc_heur->add_option("--eps", he_eps, "epsilon")->capture_default_str();
  cc_heur->add_option("--i", he_i, "Index of P")->capture_default_str();
  cc_heur->add_option("--j", he_j, "Index of Q")->capture_default_str();
  he_effort.attach(cc_heur);
  cc_heur->callback([&] {
    action = [&] {
      auto [curve, pts] = cin_heur.resolve();
      const HeuristicReport r = heuristic_report(pick(pts, he_i), pick(pts, he_j), he_eps, curve, he_effort.effort);
      if (as_json) {
        out << json{{"manifest", make_manifest(*cc_heur, he_effort.effort.seed)},
                    {"lhs", static_cast<double>(r.lhs)},
                    {"rhs_actual", static_cast<double>(r.rhs_actual)},
                    {"rhs_paper", opt_real(r.rhs_paper)},
                    {"gap", static_cast<double>(r.gap)},
                    {"certain", r.certain}}
                   .dump()
            << "\n";
      } else {
        out << "log c                      " << fmt_real(r.lhs) << "\n";
        out << "(1+eps) log rad(dXYZ)      " << fmt_real(r.rhs_actual) << "\n";
        out << "(1+eps) dominant estimate  " << (r.rhs_paper ? fmt_real(*r.rhs_paper) : std::string("undefined")) << "\n";
        out << "gap                        " << fmt_real(r.gap) << "\n";
      }
    };
  });

  // hunt
  std::string h_config, h_out;
  unsigned h_jobs = 1;
  std::size_t h_top = 10;
  auto* h_cmd = app.add_subcommand("hunt", "Grid search over nP +- mQ");
  h_cmd->add_option("--config", h_config, "Hunt config JSON")->required();
  h_cmd->add_option("--out", h_out, "JSONL record store to write")->required();
  h_cmd->add_option("--jobs", h_jobs, "Worker threads")->capture_default_str();
  h_cmd->add_option("--top", h_top, "Leaderboard size")->capture_default_str();
  h_cmd->callback([&] {
    action = [&] {
      std::ifstream in(h_config);
      if (!in) throw ValidationError("cannot open config " + h_config);
      json cj;
      try {
        cj = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
      }
      const HuntConfig cfg = hunt_config_from_json(cj);
      json manifest = make_manifest(*h_cmd, cfg.effort.seed);
      manifest["config"] = hunt_config_json(cfg);
      manifest["started"] = utc_now();

      const HuntResult result = grid_hunt(cfg, h_jobs, data_timestamp());
      {
        std::ofstream trunc(h_out, std::ios::binary | std::ios::trunc);
        if (!trunc) throw ValidationError("cannot write " + h_out);
      }
      JsonlStore store(h_out);
      for (const auto& r : result.records) store.persist(r);
      manifest["finished"] = utc_now();
      write_manifest_file(h_out, manifest);

      std::map<std::string, std::size_t> skip_counts;
      for (const auto& s : result.skips) ++skip_counts[skip_reason_name(s.reason)];
      std::size_t exceedances = 0;
      std::optional<long double> max_gap;
      for (const auto& r : result.records) {
        if (r.quality.exceeds_radical) ++exceedances;
        if (!max_gap || r.heuristic.gap > *max_gap) max_gap = r.heuristic.gap;
      }
      const auto board = leaderboard(result.records, h_top);
      if (as_json) {
        json recs = json::array();
        for (const auto& r : result.records) recs.push_back(record_json(r));
        json top = json::array();
        for (const auto& r : board) top.push_back(record_json(r));
        json skips = json::array();
        for (const auto& s : result.skips) {
          skips.push_back({{"n", s.n}, {"m", s.m}, {"sign", std::string(1, sign_char(s.sign))}, {"reason", skip_reason_name(s.reason)}});
        }
        out << json{{"cells", cfg.cell_count()},
                    {"records", recs},
                    {"skips", skips},
                    {"max_quality", opt_real(result.max_quality())},
                    {"max_gap", opt_real(max_gap)},
                    {"exceedances", exceedances},
                    {"leaderboard", top},
                    {"store", h_out},
                    {"manifest", h_out + ".manifest.json"}}
                   .dump()
            << "\n";
        return;
      }
      out << "cells " << cfg.cell_count() << "  records " << result.records.size() << "  skips "
          << result.skips.size();
      for (const auto& [k, v] : skip_counts) out << " (" << k << ": " << v << ")";
      out << "\n";
      out << "max quality " << (result.max_quality() ? fmt_real(*result.max_quality(), 6) : std::string("-"))
          << "  max gap " << (max_gap ? fmt_real(*max_gap, 4) : std::string("-"))
          << "  exceedances (c > rad) " << exceedances << "\n\n";
      out << "records\n";
      print_records_table(out, result.records, false);
      out << "\nleaderboard (top " << h_top << ")\n";
      print_records_table(out, board, true);
      out << "\nstore " << h_out << "  manifest " << h_out << ".manifest.json\n";
    };
  });

  // leaderboard
  std::string lb_store;
  std::size_t lb_top = 10;
  auto* lb_cmd = app.add_subcommand("leaderboard", "Top records of a JSONL store by quality");
  lb_cmd->add_option("--store", lb_store, "JSONL store")->required();
  lb_cmd->add_option("--top", lb_top, "How many")->capture_default_str();
  lb_cmd->callback([&] {
    action = [&] {
      const auto board = leaderboard(load_store(lb_store), lb_top);
      if (as_json) {
        json top = json::array();
        for (const auto& r : board) top.push_back(record_json(r));
        out << json{{"manifest", make_manifest(*lb_cmd, 0)}, {"leaderboard", top}}.dump() << "\n";
      } else {
        print_records_table(out, board, true);
      }
    };
  });

  // quality histogram over a store
  std::string qh_store;
  double qh_width = 0.1;
  auto* qh_cmd = app.add_subcommand("quality-hist", "Histogram of record qualities in a JSONL store");
  qh_cmd->add_option("--store", qh_store, "JSONL store")->required();
  qh_cmd->add_option("--bin-width", qh_width, "Bin width")->capture_default_str();
  qh_cmd->callback([&] {
    action = [&] {
      std::vector<QualitySample> samples;
      for (const auto& r : load_store(qh_store)) {
        samples.push_back({static_cast<double>(r.quality.quality), r.quality.certain});
      }
      const QualityHistogram h = quality_histogram(samples, qh_width);
      if (as_json) {
        json bins = json::array();
        for (const auto& [k, v] : h.bins) bins.push_back({{"lower", h.bin_lower(k)}, {"upper", h.bin_lower(k + 1)}, {"count", v}});
        out << json{{"manifest", make_manifest(*qh_cmd, 0)}, {"bins", bins}, {"uncertain", h.uncertain}}.dump() << "\n";
      } else {
        out << "lower,upper,count\n";
        for (const auto& [k, v] : h.bins) out << fmt_real(h.bin_lower(k), 4) << "," << fmt_real(h.bin_lower(k + 1), 4) << "," << v << "\n";
        out << "# uncertain records: " << h.uncertain << "\n";
      }
    };
  });

  // omega-stats
  std::vector<std::uint64_t> os_x;
  std::vector<double> os_eps{0.0};
  std::string os_centering = "upper";
  std::uint64_t os_ceiling = kDefaultSieveCeiling;
  std::string os_out;
  auto* os_cmd = app.add_subcommand("omega-stats", "omega(n) census and exceptional-set density");
  os_cmd->add_option("--x", os_x, "Upper limit(s) x")->required();
  os_cmd->add_option("--eps", os_eps, "eps value(s) > -1/2")->capture_default_str();
  os_cmd->add_option("--centering", os_centering, "Center on log log x (upper) or log log n (per-n)")
      ->check(CLI::IsMember({"upper", "per-n"}))
      ->capture_default_str();
  os_cmd->add_option("--ceiling", os_ceiling, "Largest x the sieve may be built for")->capture_default_str();
  os_cmd->add_option("--out", os_out, "Also write the CSV to this file (with a manifest sidecar)");
  os_cmd->callback([&] {
    action = [&] {
      std::uint64_t top = 0;
      for (auto x : os_x) {
        check_census_range(x, os_ceiling);
        top = std::max(top, x);
      }
      for (double e : os_eps) {
        if (!(e > -0.5)) throw ValidationError("eps must be > -1/2");
      }
      const Centering centering = os_centering == "upper" ? Centering::upper_limit : Centering::per_n;
      const OmegaSieve sieve(top);
      std::ostringstream csv;
      csv << "x,eps,mean,stddev,loglog_x,density\n";
      json rows = json::array();
      for (auto x : os_x) {
        const OmegaCensus census = census_from_sieve(sieve, x);
        json hist = json::object();
        for (const auto& [k, v] : census.histogram) hist[std::to_string(k)] = v;
        for (double e : os_eps) {
          const double d = density_from_sieve(sieve, x, e, centering);
          csv << x << "," << e << "," << std::setprecision(10) << census.mean << "," << census.stddev
              << "," << census.loglog_x << "," << d << "\n";
          rows.push_back({{"x", x}, {"eps", e}, {"mean", census.mean}, {"stddev", census.stddev},
                          {"loglog_x", census.loglog_x}, {"density", d}, {"histogram", hist}});
        }
      }
      if (!os_out.empty()) {
        std::ofstream f(os_out, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot write " + os_out);
        f << csv.str();
        write_manifest_file(os_out, make_manifest(*os_cmd, 0));
      }
      if (as_json) {
        out << json{{"manifest", make_manifest(*os_cmd, 0)}, {"centering", os_centering}, {"rows", rows}}.dump() << "\n";
      } else {
        out << csv.str();
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegenerateCase& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace abcwb::cli
