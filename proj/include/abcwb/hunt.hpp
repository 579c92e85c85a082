#pragma once

// Grid search over nP + mQ and nP - mQ on a Mordell curve: every cell's sum
// is turned into an abc triple, scored, and recorded together with the
// predicted and actual denominators. Cells are independent; the result is
// always returned in canonical (n, m, sign) order.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "abcwb/abc.hpp"
#include "abcwb/errors.hpp"
#include "abcwb/mordell.hpp"
#include "abcwb/numtheory.hpp"
#include "json.hpp"

namespace abcwb {

enum class Sign : char { plus = '+', minus = '-' };

inline char sign_char(Sign s) { return static_cast<char>(s); }

inline Sign parse_sign(const std::string& s) {
  if (s == "+") return Sign::plus;
  if (s == "-") return Sign::minus;
  throw ValidationError("sign must be \"+\" or \"-\", got \"" + s + "\"");
}

struct IntRange {
  long long lo = 1;
  long long hi = 1;
  std::uint64_t size() const { return hi >= lo ? static_cast<std::uint64_t>(hi - lo + 1) : 0; }
};

inline constexpr std::size_t kDefaultHuntDigitCap = 2000;

struct HuntConfig {
  Curve curve = Curve::mordell(BigInt(17));
  std::vector<CurvePoint> base_points;
  IntRange n_range{1, 6};
  IntRange m_range{1, 6};
  std::vector<Sign> signs{Sign::plus, Sign::minus};
  long double epsilon = 0;
  FactorEffort effort;
  std::size_t digit_cap = kDefaultHuntDigitCap;

  void validate() const {
    if (!curve.is_mordell()) throw ValidationError("hunt: curve must have A = 0");
    if (base_points.size() < 2) throw ValidationError("hunt: need at least two base points");
    for (const auto& p : base_points) {
      if (p.is_infinity() || !on_curve(p, curve)) {
        throw ValidationError("hunt: base point is not an affine point on the curve");
      }
    }
    if (n_range.size() == 0 || m_range.size() == 0) throw ValidationError("hunt: empty range");
    if (n_range.lo < 0 || m_range.lo < 0) throw ValidationError("hunt: ranges must be >= 0");
    if (signs.empty()) throw ValidationError("hunt: no signs selected");
    if (digit_cap < 1) throw ValidationError("hunt: digit cap must be >= 1");
    if (!(epsilon >= 0)) throw ValidationError("hunt: eps must be >= 0");
  }

  std::uint64_t cell_count() const { return n_range.size() * m_range.size() * signs.size(); }
};

inline HuntConfig hunt_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("hunt config: expected a JSON object");
  auto count = [&](const char* key, long long fallback) -> long long {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ValidationError(std::string("hunt config: ") + key + " must be an integer");
    return j[key].get<long long>();
  };
  auto unsigned_count = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    const long long v = count(key, static_cast<long long>(fallback));
    if (v < 0) throw ValidationError(std::string("hunt config: ") + key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  };
  for (const char* key : {"A", "B", "points"}) {
    if (!j.contains(key)) throw ValidationError(std::string("hunt config: missing ") + key);
  }
  HuntConfig cfg;
  cfg.curve = Curve(json_integer(j["A"], "A"), json_integer(j["B"], "B"));
  if (!j["points"].is_array()) throw ValidationError("hunt config: points must be an array");
  for (const auto& p : j["points"]) cfg.base_points.push_back(point_from_json(p));
  cfg.n_range = {count("nMin", 1), count("nMax", 6)};
  cfg.m_range = {count("mMin", 1), count("mMax", 6)};
  if (j.contains("signs")) {
    cfg.signs.clear();
    const auto& s = j["signs"];
    if (s.is_string()) {
      for (char ch : s.get<std::string>()) cfg.signs.push_back(parse_sign(std::string(1, ch)));
    } else if (s.is_array()) {
      for (const auto& e : s) cfg.signs.push_back(parse_sign(e.get<std::string>()));
    } else {
      throw ValidationError("hunt config: signs must be a string or an array");
    }
    std::sort(cfg.signs.begin(), cfg.signs.end(),
              [](Sign a, Sign b) { return sign_char(a) < sign_char(b); });
    cfg.signs.erase(std::unique(cfg.signs.begin(), cfg.signs.end()), cfg.signs.end());
  }
  if (j.contains("eps")) {
    if (!j["eps"].is_number()) throw ValidationError("hunt config: eps must be a number");
    cfg.epsilon = j["eps"].get<double>();
  }
  cfg.effort.trial_bound = unsigned_count("effortTrialBound", cfg.effort.trial_bound);
  cfg.effort.rho_cap = unsigned_count("effortRhoCap", cfg.effort.rho_cap);
  cfg.effort.seed = unsigned_count("seed", cfg.effort.seed);
  cfg.digit_cap = unsigned_count("digitCap", cfg.digit_cap);
  cfg.validate();
  return cfg;
}

inline nlohmann::json hunt_config_json(const HuntConfig& cfg) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : cfg.base_points) points.push_back(point_json(p));
  std::string signs;
  for (Sign s : cfg.signs) signs.push_back(sign_char(s));
  return {{"A", to_decimal(cfg.curve.A())},
          {"B", to_decimal(cfg.curve.B())},
          {"points", points},
          {"nMin", cfg.n_range.lo},
          {"nMax", cfg.n_range.hi},
          {"mMin", cfg.m_range.lo},
          {"mMax", cfg.m_range.hi},
          {"signs", signs},
          {"eps", static_cast<double>(cfg.epsilon)},
          {"effortTrialBound", cfg.effort.trial_bound},
          {"effortRhoCap", cfg.effort.rho_cap},
          {"digitCap", cfg.digit_cap},
          {"seed", cfg.effort.seed}};
}

// ---------------------------------------------------------------------------

struct TripleRecord {
  TripleRecord(AbcTriple t, QualityReport q) : triple(std::move(t)), quality(std::move(q)) {}

  AbcTriple triple;
  QualityReport quality;
  BigInt curve_B;
  long long n = 0;
  long long m = 0;
  Sign sign = Sign::plus;
  BigInt raw_Z;         // 0 when nP = +-mQ (sum taken by doubling)
  BigInt reduced_Z;
  BigInt cancellation;  // |raw_Z| / reduced_Z, 0 when raw_Z = 0
  std::int64_t timestamp = 0;
  CurvePoint point = CurvePoint::infinity();  // the summed point
  HeuristicReport heuristic;
};

// Records round-trip through JSON with quality at double precision.
inline bool same_record(const TripleRecord& l, const TripleRecord& r) {
  auto opt_eq = [](const std::optional<long double>& a, const std::optional<long double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || static_cast<double>(*a) == static_cast<double>(*b);
  };
  return l.triple == r.triple && l.quality.radical == r.quality.radical &&
         static_cast<double>(l.quality.quality) == static_cast<double>(r.quality.quality) &&
         l.quality.certain == r.quality.certain && l.curve_B == r.curve_B && l.n == r.n &&
         l.m == r.m && l.sign == r.sign && l.raw_Z == r.raw_Z && l.reduced_Z == r.reduced_Z &&
         l.cancellation == r.cancellation && l.timestamp == r.timestamp && l.point == r.point &&
         static_cast<double>(l.heuristic.gap) == static_cast<double>(r.heuristic.gap) &&
         static_cast<double>(l.heuristic.lhs) == static_cast<double>(r.heuristic.lhs) &&
         static_cast<double>(l.heuristic.rhs_actual) == static_cast<double>(r.heuristic.rhs_actual) &&
         opt_eq(l.heuristic.rhs_paper, r.heuristic.rhs_paper);
}

inline nlohmann::json record_json(const TripleRecord& r) {
  nlohmann::json j = {
      {"a", to_decimal(r.triple.a())},
      {"b", to_decimal(r.triple.b())},
      {"c", to_decimal(r.triple.c())},
      {"rad", to_decimal(r.quality.radical)},
      {"quality", static_cast<double>(r.quality.quality)},
      {"certain", r.quality.certain},
      {"curve_B", to_decimal(r.curve_B)},
      {"n", r.n},
      {"m", r.m},
      {"sign", std::string(1, sign_char(r.sign))},
      {"raw_Z", to_decimal(r.raw_Z)},
      {"reduced_Z", to_decimal(r.reduced_Z)},
      {"cancellation", to_decimal(r.cancellation)},
      {"timestamp", r.timestamp},
      {"point", point_json(r.point)},
      {"lhs", static_cast<double>(r.heuristic.lhs)},
      {"rhs_actual", static_cast<double>(r.heuristic.rhs_actual)},
      {"rhs_paper", nullptr},
      {"gap", static_cast<double>(r.heuristic.gap)},
  };
  if (r.heuristic.rhs_paper) j["rhs_paper"] = static_cast<double>(*r.heuristic.rhs_paper);
  return j;
}

/// Exact re-validation of a record: triple invariants, the source point on
/// y^2 = x^3 + B, and the triple extracted again from that point.
inline bool revalidate(const TripleRecord& r) {
  if (!is_valid_triple(r.triple.a(), r.triple.b(), r.triple.c())) return false;
  if (r.point.is_infinity()) return false;
  if (r.curve_B == 0) return false;
  const Curve curve = Curve::mordell(r.curve_B);
  if (!on_curve(r.point, curve)) return false;
  if (r.point.Z() != r.reduced_Z) return false;
  if (r.raw_Z != 0) {
    if (abs(r.raw_Z) != r.reduced_Z * r.cancellation) return false;
  }
  try {
    return extract_triple(r.point, curve).triple == r.triple;
  } catch (const std::exception&) {
    return false;
  }
}

class StoreError : public ValidationError {
 public:
  StoreError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline TripleRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) {
      throw ValidationError(std::string("missing or non-string field ") + key);
    }
    return j[key].get<std::string>();
  };
  auto num = [&](const char* key) -> long double {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ValidationError(std::string("missing or non-numeric field ") + key);
    }
    return j[key].get<double>();
  };
  auto integer = [&](const char* key) -> long long {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      throw ValidationError(std::string("missing or non-integer field ") + key);
    }
    return j[key].get<long long>();
  };
  if (!j.contains("certain") || !j["certain"].is_boolean()) {
    throw ValidationError("missing or non-boolean field certain");
  }
  if (!j.contains("point")) throw ValidationError("missing field point");

  TripleRecord r{AbcTriple::from_terms(parse_natural(str("a")), parse_natural(str("b")),
                                       parse_natural(str("c"))),
                 QualityReport{}};
  r.quality.radical = parse_natural(str("rad"));
  r.quality.quality = num("quality");
  r.quality.certain = j["certain"].get<bool>();
  r.quality.exceeds_radical = r.triple.c() > r.quality.radical;
  r.curve_B = parse_integer(str("curve_B"));
  r.n = integer("n");
  r.m = integer("m");
  r.sign = parse_sign(str("sign"));
  r.raw_Z = parse_integer(str("raw_Z"));
  r.reduced_Z = parse_natural(str("reduced_Z"));
  r.cancellation = parse_natural(str("cancellation"));
  r.timestamp = integer("timestamp");
  r.point = point_from_json(j["point"]);
  r.heuristic.lhs = num("lhs");
  r.heuristic.rhs_actual = num("rhs_actual");
  r.heuristic.gap = num("gap");
  r.heuristic.certain = r.quality.certain;
  if (j.contains("rhs_paper") && !j["rhs_paper"].is_null()) r.heuristic.rhs_paper = num("rhs_paper");
  if (!revalidate(r)) throw ValidationError("record does not re-validate against its source point");
  return r;
}

/// Append-only JSONL file; appends from concurrent producers are serialized.
class JsonlStore {
 public:
  explicit JsonlStore(std::string path) : path_(std::move(path)) {}

  const std::string& path() const { return path_; }

  void persist(const TripleRecord& r) {
    const std::string line = record_json(r).dump() + "\n";
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path_ + " for appending");
    out << line;
    if (!out.flush()) throw std::runtime_error("write to " + path_ + " failed");
  }

 private:
  std::string path_;
  std::mutex mu_;
};

/// Loads and validates every line; any bad line rejects the whole file.
inline std::vector<TripleRecord> load_store(std::istream& in) {
  std::vector<TripleRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw StoreError(line_no, "empty line");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw StoreError(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      out.push_back(record_from_json(j));
    } catch (const ValidationError& e) {
      throw StoreError(line_no, e.what());
    }
  }
  return out;
}

inline std::vector<TripleRecord> load_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open store " + path);
  return load_store(in);
}

// ---------------------------------------------------------------------------

enum class SkipReason { infinity, digit_cap, degenerate };

inline const char* skip_reason_name(SkipReason r) {
  switch (r) {
    case SkipReason::infinity: return "infinity";
    case SkipReason::digit_cap: return "digit_cap";
    case SkipReason::degenerate: return "degenerate";
  }
  return "?";
}

struct Skip {
  long long n = 0;
  long long m = 0;
  Sign sign = Sign::plus;
  SkipReason reason = SkipReason::infinity;
};

struct HuntResult {
  std::vector<TripleRecord> records;  // canonical (n, m, sign) order
  std::vector<Skip> skips;

  std::optional<long double> max_quality() const {
    std::optional<long double> best;
    for (const auto& r : records) {
      if (!best || r.quality.quality > *best) best = r.quality.quality;
    }
    return best;
  }
};

namespace detail {

inline std::size_t max_digits(const CurvePoint& p) {
  return std::max({decimal_digits(p.X()), decimal_digits(p.Y()), decimal_digits(p.Z())});
}

inline std::vector<CurvePoint> multiples(const CurvePoint& p, const IntRange& range, const Curve& c) {
  std::vector<CurvePoint> out;
  out.reserve(range.size());
  CurvePoint current = scalar_mul(range.lo, p, c);
  for (long long k = range.lo; k <= range.hi; ++k) {
    out.push_back(current);
    current = add(current, p, c);
  }
  return out;
}

struct CellOutcome {
  std::optional<TripleRecord> record;
  std::optional<Skip> skip;
};

}  // namespace detail

inline detail::CellOutcome hunt_cell(const HuntConfig& cfg, const CurvePoint& np,
                                     const CurvePoint& mq, long long n, long long m, Sign sign,
                                     FactorMemo& memo, std::int64_t timestamp) {
  const Curve& curve = cfg.curve;
  const CurvePoint q = sign == Sign::plus ? mq : negate(mq);
  const CurvePoint sum = add(np, q, curve);
  detail::CellOutcome out;
  if (sum.is_infinity()) {
    out.skip = Skip{n, m, sign, SkipReason::infinity};
    return out;
  }
  if (detail::max_digits(sum) > cfg.digit_cap) {
    out.skip = Skip{n, m, sign, SkipReason::digit_cap};
    return out;
  }
  if (sum.X() == 0 || sum.Y() == 0) {
    out.skip = Skip{n, m, sign, SkipReason::degenerate};
    return out;
  }
  ExtractedTriple ex = extract_triple(sum, curve);
  TripleRecord r{ex.triple, quality(ex.triple, memo)};
  r.curve_B = curve.B();
  r.n = n;
  r.m = m;
  r.sign = sign;
  r.raw_Z = (np.is_infinity() || q.is_infinity()) ? BigInt(0) : raw_denominator(np, q);
  r.reduced_Z = sum.Z();
  r.cancellation = r.raw_Z == 0 ? BigInt(0) : BigInt(abs(r.raw_Z) / r.reduced_Z);
  r.timestamp = timestamp;
  r.point = sum;
  r.heuristic = heuristic_from(np, q, sum, ex.triple, curve, cfg.epsilon,
                               [&](const BigInt& v) { return memo.get(v); });
  out.record = std::move(r);
  return out;
}

/// Runs every (n, m, sign) cell, using up to `jobs` threads. Each finished
/// record is also handed to `sink` (if given) as it completes.
template <typename Sink>
HuntResult grid_hunt(const HuntConfig& cfg, unsigned jobs, std::int64_t timestamp, Sink&& sink) {
  cfg.validate();
  const Curve& curve = cfg.curve;
  const auto n_multiples = detail::multiples(cfg.base_points[0], cfg.n_range, curve);
  const auto m_multiples = detail::multiples(cfg.base_points[1], cfg.m_range, curve);

  struct Cell {
    std::size_t ni, mi;
    Sign sign;
  };
  std::vector<Cell> cells;
  cells.reserve(cfg.cell_count());
  for (std::size_t ni = 0; ni < n_multiples.size(); ++ni) {
    for (std::size_t mi = 0; mi < m_multiples.size(); ++mi) {
      for (Sign s : cfg.signs) cells.push_back({ni, mi, s});
    }
  }

  FactorMemo memo(cfg.effort);
  std::vector<detail::CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        const Cell& cell = cells[i];
        outcomes[i] = hunt_cell(cfg, n_multiples[cell.ni], m_multiples[cell.mi],
                                cfg.n_range.lo + static_cast<long long>(cell.ni),
                                cfg.m_range.lo + static_cast<long long>(cell.mi), cell.sign, memo,
                                timestamp);
        if (outcomes[i].record) {
          std::lock_guard lock(sink_mu);
          sink(*outcomes[i].record);
        }
      }
    } catch (...) {
      std::lock_guard lock(sink_mu);
      if (!failure) failure = std::current_exception();
      next = cells.size();
    }
  };

  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  HuntResult result;
  for (auto& o : outcomes) {
    if (o.record) result.records.push_back(std::move(*o.record));
    if (o.skip) result.skips.push_back(*o.skip);
  }
  return result;
}

inline HuntResult grid_hunt(const HuntConfig& cfg, unsigned jobs = 1, std::int64_t timestamp = 0) {
  return grid_hunt(cfg, jobs, timestamp, [](const TripleRecord&) {});
}

// ---------------------------------------------------------------------------

/// Top-k by quality (uncertain records rank by their lower bound), ties by
/// smaller c, then (n, m, sign).
inline std::vector<TripleRecord> leaderboard(std::vector<TripleRecord> store, std::size_t k) {
  std::sort(store.begin(), store.end(), [](const TripleRecord& l, const TripleRecord& r) {
    if (l.quality.quality != r.quality.quality) return l.quality.quality > r.quality.quality;
    if (l.triple.c() != r.triple.c()) return l.triple.c() < r.triple.c();
    if (l.n != r.n) return l.n < r.n;
    if (l.m != r.m) return l.m < r.m;
    return sign_char(l.sign) < sign_char(r.sign);
  });
  if (store.size() > k) store.erase(store.begin() + static_cast<std::ptrdiff_t>(k), store.end());
  return store;
}

}  // namespace abcwb
