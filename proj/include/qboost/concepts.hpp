#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qboost/common.hpp"
#include "qboost/weights.hpp"

namespace qboost {

// An n-bit input. Feature i (0-based) is bit i of the integer and the i-th
// character (from the left) of the textual bitstring.
using Point = std::uint64_t;

inline constexpr int kMaxBits = 63;
inline constexpr int kMaxTableBits = 20;

inline int feature_bit(Point x, int i) { return static_cast<int>((x >> i) & 1u); }

inline std::string to_bitstring(Point x, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i) {
    if (feature_bit(x, i)) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

inline Point from_bitstring(const std::string& s) {
  if (s.empty() || s.size() > static_cast<std::size_t>(kMaxBits)) {
    throw ParseError("bitstring length out of range: '" + s + "'");
  }
  Point x = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      x |= Point{1} << i;
    } else if (s[i] != '0') {
      throw ParseError("bad bitstring '" + s + "'");
    }
  }
  return x;
}

struct Example {
  Point x = 0;
  Label y = 1;

  friend bool operator==(const Example&, const Example&) = default;
};

class Concept {
 public:
  enum class Kind { majority, dictator, constant, parity, table };

  // Majority over the features set in `mask`; the mask needs an odd popcount.
  static Concept majority(int n, std::uint64_t mask) {
    check_n(n);
    detail::require(mask != 0 && (mask >> n) == 0, "majority mask outside the input width");
    detail::require(std::popcount(mask) % 2 == 1, "majority needs an odd number of features");
    return Concept(Kind::majority, n, mask, 1, {});
  }

  static Concept majority_of_first(int n, int k) {
    detail::require(k >= 1 && k <= n, "majority size out of range");
    return majority(n, (std::uint64_t{1} << k) - 1);
  }

  static Concept dictator(int n, int feature) {
    check_n(n);
    detail::require(feature >= 0 && feature < n, "dictator feature out of range");
    return Concept(Kind::dictator, n, std::uint64_t{1} << feature, 1, {});
  }

  static Concept constant(int n, Label value) {
    check_n(n);
    detail::require(value == 1 || value == -1, "constant label must be +1 or -1");
    return Concept(Kind::constant, n, 0, value, {});
  }

  // +1 when an even number of the masked features are set.
  static Concept parity(int n, std::uint64_t mask) {
    check_n(n);
    detail::require(mask != 0 && (mask >> n) == 0, "parity mask outside the input width");
    return Concept(Kind::parity, n, mask, 1, {});
  }

  static Concept table(int n, std::vector<Label> labels) {
    detail::require(n >= 1 && n <= kMaxTableBits, "label tables support 1 <= n <= 20");
    detail::require(labels.size() == (std::size_t{1} << n), "label table must have 2^n entries");
    for (Label y : labels) detail::require(y == 1 || y == -1, "labels must be +1 or -1");
    return Concept(Kind::table, n, 0, 1, std::move(labels));
  }

  Label operator()(Point x) const {
    switch (kind_) {
      case Kind::majority: {
        const int ones = std::popcount(x & mask_);
        return 2 * ones > std::popcount(mask_) ? 1 : -1;
      }
      case Kind::dictator:
        return (x & mask_) ? 1 : -1;
      case Kind::constant:
        return value_;
      case Kind::parity:
        return std::popcount(x & mask_) % 2 == 0 ? 1 : -1;
      case Kind::table:
        return table_[static_cast<std::size_t>(x & ((std::uint64_t{1} << n_) - 1))];
    }
    return 1;
  }

  int n() const { return n_; }
  Kind kind() const { return kind_; }
  std::uint64_t mask() const { return mask_; }

  std::string name() const {
    switch (kind_) {
      case Kind::majority: return "majority";
      case Kind::dictator: return "dictator";
      case Kind::constant: return "constant";
      case Kind::parity: return "parity";
      case Kind::table: return "table";
    }
    return "unknown";
  }

 private:
  Concept(Kind kind, int n, std::uint64_t mask, Label value, std::vector<Label> table)
      : kind_(kind), n_(n), mask_(mask), value_(value), table_(std::move(table)) {}

  static void check_n(int n) { detail::require(n >= 1 && n <= kMaxBits, "bit-width must be in [1, 63]"); }

  Kind kind_;
  int n_;
  std::uint64_t mask_;
  Label value_;
  std::vector<Label> table_;
};

// Parses "majority", "majority:<k>", "dictator:<i>" (1-based), "constant:+1",
// "parity", "parity:<k>".
inline Concept parse_concept(const std::string& spec, int n) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto int_arg = [&](int fallback) {
    if (arg.empty()) return fallback;
    try {
      std::size_t used = 0;
      const int v = std::stoi(arg, &used);
      if (used != arg.size()) throw ParseError("bad concept argument '" + arg + "'");
      return v;
    } catch (const std::logic_error&) {
      throw ParseError("bad concept argument '" + arg + "'");
    }
  };
  try {
    if (head == "majority") return Concept::majority_of_first(n, int_arg(n));
    if (head == "dictator") return Concept::dictator(n, int_arg(1) - 1);
    if (head == "constant") return Concept::constant(n, int_arg(1));
    if (head == "parity") {
      const int k = int_arg(n);
      detail::require(k >= 1 && k <= n, "parity size out of range");
      return Concept::parity(n, (std::uint64_t{1} << k) - 1);
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("concept '") + spec + "': " + e.what());
  }
  throw ParseError("unknown concept '" + spec + "'");
}

class Sampler {
 public:
  enum class Kind { uniform, bernoulli };

  static Sampler uniform(int n) {
    detail::require(n >= 1 && n <= kMaxBits, "bit-width must be in [1, 63]");
    return Sampler(Kind::uniform, n, 0.5);
  }

  // Independent bits, each 1 with probability p.
  static Sampler bernoulli(int n, double p) {
    detail::require(n >= 1 && n <= kMaxBits, "bit-width must be in [1, 63]");
    detail::require(p > 0.0 && p < 1.0, "bernoulli sampler needs p in (0, 1)");
    return Sampler(Kind::bernoulli, n, p);
  }

  template <Rng64 G>
  Point draw(G& rng) const {
    if (kind_ == Kind::uniform) {
      return rng() & ((std::uint64_t{1} << n_) - 1);
    }
    Point x = 0;
    for (int i = 0; i < n_; ++i) {
      if (detail::uniform01(rng) < p_) x |= Point{1} << i;
    }
    return x;
  }

  double probability(Point x) const {
    if (kind_ == Kind::uniform) return std::ldexp(1.0, -n_);
    const int ones = std::popcount(x);
    return std::pow(p_, ones) * std::pow(1.0 - p_, n_ - ones);
  }

  int n() const { return n_; }
  Kind kind() const { return kind_; }
  double p() const { return p_; }

  std::string describe() const {
    if (kind_ == Kind::uniform) return "uniform";
    std::ostringstream os;
    os.precision(17);
    os << "bernoulli:" << p_;
    return os.str();
  }

 private:
  Sampler(Kind kind, int n, double p) : kind_(kind), n_(n), p_(p) {}

  Kind kind_;
  int n_;
  double p_;
};

// "uniform" or "bernoulli:<p>".
inline Sampler parse_sampler(const std::string& spec, int n) {
  if (spec == "uniform") return Sampler::uniform(n);
  if (spec.rfind("bernoulli:", 0) == 0) {
    try {
      return Sampler::bernoulli(n, std::stod(spec.substr(10)));
    } catch (const std::logic_error&) {
      throw ParseError("bad sampler '" + spec + "'");
    }
  }
  throw ParseError("unknown sampler '" + spec + "'");
}

struct TrainingSet {
  int n = 0;
  std::vector<Example> points;
  std::optional<Sampler> sampler;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

template <Rng64 G>
TrainingSet generate_training_set(const Concept& c, const Sampler& sampler, std::size_t m, G& rng,
                                  bool dedup = true) {
  detail::require(m >= 1, "training set size must be at least 1");
  detail::require(sampler.n() == c.n(), "sampler and concept bit-widths differ");
  const int n = c.n();
  if (dedup && n < 63) {
    detail::require(m <= (std::uint64_t{1} << n), "cannot draw more distinct points than 2^n");
  }
  TrainingSet s;
  s.n = n;
  s.sampler = sampler;
  if (dedup) {
    std::set<Point> seen;
    while (seen.size() < m) seen.insert(sampler.draw(rng));
    for (Point x : seen) s.points.push_back({x, c(x)});
  } else {
    s.points.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Point x = sampler.draw(rng);
      s.points.push_back({x, c(x)});
    }
  }
  return s;
}

// Every point of {0,1}^n, labelled by c.
inline TrainingSet full_domain(const Concept& c) {
  detail::require(c.n() <= 24, "full domain limited to n <= 24");
  TrainingSet s;
  s.n = c.n();
  s.sampler = Sampler::uniform(c.n());
  const Point size = Point{1} << c.n();
  s.points.reserve(static_cast<std::size_t>(size));
  for (Point x = 0; x < size; ++x) s.points.push_back({x, c(x)});
  return s;
}

class Hypothesis {
 public:
  enum class Kind { stump, constant };

  Hypothesis() = default;

  // Predicts `polarity` when feature is set, -polarity otherwise.
  static Hypothesis stump(int feature, Label polarity) {
    detail::require(feature >= 0 && feature < kMaxBits, "stump feature out of range");
    detail::require(polarity == 1 || polarity == -1, "polarity must be +1 or -1");
    Hypothesis h;
    h.kind_ = Kind::stump;
    h.feature_ = feature;
    h.sign_ = polarity;
    return h;
  }

  static Hypothesis constant(Label value) {
    detail::require(value == 1 || value == -1, "constant must be +1 or -1");
    Hypothesis h;
    h.kind_ = Kind::constant;
    h.sign_ = value;
    return h;
  }

  Label operator()(Point x) const {
    if (kind_ == Kind::constant) return sign_;
    return feature_bit(x, feature_) ? sign_ : -sign_;
  }

  Kind kind() const { return kind_; }
  int feature() const { return feature_; }
  Label polarity() const { return sign_; }

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;

 private:
  Kind kind_ = Kind::constant;
  int feature_ = 0;
  Label sign_ = 1;
};

inline std::string describe(const Hypothesis& h) {
  if (h.kind() == Hypothesis::Kind::constant) return h.polarity() > 0 ? "const(+1)" : "const(-1)";
  return "stump(x" + std::to_string(h.feature() + 1) + (h.polarity() > 0 ? ",+)" : ",-)");
}

struct StumpFit {
  Hypothesis h;
  double error = 0.0;
};

inline constexpr double kTieTolerance = 1e-13;

// All 2n+2 candidates in tie-break order.
inline std::vector<Hypothesis> candidate_hypotheses(int n) {
  std::vector<Hypothesis> out;
  out.reserve(static_cast<std::size_t>(2 * n + 2));
  for (int i = 0; i < n; ++i) {
    out.push_back(Hypothesis::stump(i, 1));
    out.push_back(Hypothesis::stump(i, -1));
  }
  out.push_back(Hypothesis::constant(1));
  out.push_back(Hypothesis::constant(-1));
  return out;
}

// Exact minimizer of the weighted error over stumps and constants. D is
// renormalized internally; the returned error is under the normalized D.
inline StumpFit best_stump(const TrainingSet& s, std::span<const double> d) {
  if (s.empty()) throw InvalidArgument("best_stump on an empty training set");
  detail::require(s.n >= 1 && s.n <= kMaxBits, "training set bit-width out of range");
  detail::require(d.size() == s.size(), "weight length does not match training set");
  detail::CompensatedSum total;
  for (double w : d) {
    detail::require(w >= 0.0 && std::isfinite(w), "weights must be finite and nonnegative");
    total.add(w);
  }
  const double z = total.value();
  detail::require(z > 0.0, "weights must have positive sum");

  const int n = s.n;
  std::vector<detail::CompensatedSum> err_plus(static_cast<std::size_t>(n));
  std::vector<detail::CompensatedSum> err_minus(static_cast<std::size_t>(n));
  detail::CompensatedSum neg_mass, pos_mass;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double w = d[j];
    if (w == 0.0) continue;
    const Point x = s.points[j].x;
    const bool positive = s.points[j].y > 0;
    (positive ? pos_mass : neg_mass).add(w);
    for (int i = 0; i < n; ++i) {
      const bool predicts_positive = feature_bit(x, i) != 0;
      if (predicts_positive != positive) {
        err_plus[static_cast<std::size_t>(i)].add(w);
      } else {
        err_minus[static_cast<std::size_t>(i)].add(w);
      }
    }
  }

  StumpFit best{Hypothesis::stump(0, 1), std::numeric_limits<double>::infinity()};
  auto consider = [&](const Hypothesis& h, double e) {
    if (e < best.error - kTieTolerance) best = {h, e};
  };
  for (int i = 0; i < n; ++i) {
    consider(Hypothesis::stump(i, 1), err_plus[static_cast<std::size_t>(i)].value() / z);
    consider(Hypothesis::stump(i, -1), err_minus[static_cast<std::size_t>(i)].value() / z);
  }
  consider(Hypothesis::constant(1), neg_mass.value() / z);
  consider(Hypothesis::constant(-1), pos_mass.value() / z);
  best.error = std::clamp(best.error, 0.0, 1.0);
  return best;
}

inline StumpFit best_stump(const TrainingSet& s, const WeightVector& d) { return best_stump(s, d.values()); }

class ConceptClass {
 public:
  explicit ConceptClass(std::vector<Concept> members) : members_(std::move(members)) {
    detail::require(!members_.empty(), "concept class must be nonempty");
    for (const auto& c : members_) {
      detail::require(c.n() == members_.front().n(), "concept class members must share n");
    }
  }

  int n() const { return members_.front().n(); }
  std::size_t size() const { return members_.size(); }
  const std::vector<Concept>& members() const { return members_; }

  ConceptClass with(Concept c) const {
    auto m = members_;
    m.push_back(std::move(c));
    return ConceptClass(std::move(m));
  }

 private:
  std::vector<Concept> members_;
};

inline constexpr std::size_t kMaxVcDomain = 24;

// Largest k such that some k-subset of the domain is shattered.
inline int vc_dimension_bruteforce(const ConceptClass& cls, std::span<const Point> domain) {
  if (domain.size() > kMaxVcDomain) {
    throw InvalidArgument("domain too large for exhaustive VC search (max 24 points)");
  }
  const int d = static_cast<int>(domain.size());
  // Row per concept: bit j set when the concept labels domain[j] positive.
  std::vector<std::uint32_t> rows;
  for (const auto& c : cls.members()) {
    std::uint32_t r = 0;
    for (int j = 0; j < d; ++j) {
      if (c(domain[static_cast<std::size_t>(j)]) > 0) r |= 1u << j;
    }
    rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

  auto shattered = [&](std::uint32_t subset, int k) {
    std::vector<bool> seen(std::size_t{1} << k, false);
    std::size_t count = 0;
    for (std::uint32_t r : rows) {
      std::uint32_t pattern = 0;
      int out = 0;
      for (std::uint32_t rest = subset; rest; rest &= rest - 1, ++out) {
        if (r & (rest & (~rest + 1))) pattern |= 1u << out;
      }
      if (!seen[pattern]) {
        seen[pattern] = true;
        if (++count == seen.size()) return true;
      }
    }
    return false;
  };

  int best = 0;
  for (int k = 1; k <= d; ++k) {
    if (rows.size() < (std::size_t{1} << k)) break;
    bool found = false;
    // Gosper's hack over k-subsets of d bits.
    std::uint64_t subset = (std::uint64_t{1} << k) - 1;
    const std::uint64_t limit = std::uint64_t{1} << d;
    while (subset < limit) {
      if (shattered(static_cast<std::uint32_t>(subset), k)) {
        found = true;
        break;
      }
      const std::uint64_t c = subset & (~subset + 1);
      const std::uint64_t r = subset + c;
      subset = (((r ^ subset) >> 2) / c) | r;
    }
    if (!found) break;
    best = k;
  }
  return best;
}

// M = ceil((vc/g^2) ln(vc/g^2) / eta^2), natural log, at least 1.
inline std::uint64_t sample_size(int vc, double gamma, double eta) {
  detail::require(vc >= 1, "vc dimension must be >= 1");
  detail::require(gamma > 0.0 && gamma < 0.5, "gamma must lie in (0, 1/2)");
  detail::require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  const double r = static_cast<double>(vc) / (gamma * gamma);
  const double m = std::ceil(r * std::log(r) / (eta * eta));
  if (!(m >= 1.0)) return 1;
  if (m >= 1.8e19) throw InvalidArgument("sample size overflows 64 bits");
  return static_cast<std::uint64_t>(m);
}

struct WeakLearnerSpec {
  enum class Mode { distribution_aware, sample_based };

  Mode mode = Mode::distribution_aware;
  int Q = 4;
  double gamma_floor = 0.25;

  void validate() const {
    detail::require(Q >= 1, "Q must be >= 1");
    detail::require(gamma_floor > 0.0 && gamma_floor < 0.5, "gamma_floor must lie in (0, 1/2)");
  }
};

// Header line `n=<k> M=<m>`, then `<bitstring> <+1|-1>` per point.
inline void write_training_set(std::ostream& os, const TrainingSet& s) {
  os << "n=" << s.n << " M=" << s.size() << '\n';
  for (const auto& e : s.points) os << to_bitstring(e.x, s.n) << ' ' << (e.y > 0 ? "+1" : "-1") << '\n';
}

inline TrainingSet read_training_set(std::istream& is) {
  TrainingSet s;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("missing training set header");
  std::size_t m = 0;
  {
    std::istringstream hs(line);
    std::string a, b;
    if (!(hs >> a >> b) || a.rfind("n=", 0) != 0 || b.rfind("M=", 0) != 0) {
      throw ParseError("bad training set header '" + line + "'");
    }
    try {
      s.n = std::stoi(a.substr(2));
      m = static_cast<std::size_t>(std::stoull(b.substr(2)));
    } catch (const std::logic_error&) {
      throw ParseError("bad training set header '" + line + "'");
    }
    if (s.n < 1 || s.n > kMaxBits) throw ParseError("bit-width out of range in header");
  }
  s.points.reserve(m);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string bits, label;
    if (!(ls >> bits >> label)) throw ParseError("bad training set line '" + line + "'");
    if (static_cast<int>(bits.size()) != s.n) throw ParseError("bitstring width mismatch: '" + bits + "'");
    Label y;
    if (label == "+1" || label == "1") {
      y = 1;
    } else if (label == "-1") {
      y = -1;
    } else {
      throw ParseError("bad label '" + label + "'");
    }
    s.points.push_back({from_bitstring(bits), y});
  }
  if (s.points.size() != m) throw ParseError("header promised " + std::to_string(m) + " points");
  if (m == 0) throw ParseError("training set must contain at least one point");
  return s;
}

}  // namespace qboost
