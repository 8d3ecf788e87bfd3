#pragma once

// Stationary ergodic random media: index-keyed realizations of bond potentials
// J_j(omega, i, .) with O(1) random access at any integer index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "homchain/errors.hpp"
#include "homchain/potential.hpp"
#include "homchain/stats.hpp"

namespace homchain {

// ---------------------------------------------------------------------------
// Counter-based hashing.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::int64_t i, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  return splitmix64(h ^ (stream * 0xD1B54A32D192ED03ULL));
}

// Uniform in [0,1) keyed by (seed, index, stream).
inline double uniform01(std::uint64_t seed, std::int64_t i, std::uint64_t stream) {
  return static_cast<double>(hash_key(seed, i, stream) >> 11) * 0x1.0p-53;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
  return splitmix64(base ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
}

// ---------------------------------------------------------------------------
// Distribution specification.

enum class DistributionKind {
  iid_discrete,
  iid_uniform_box,
  markov_shift,
  sequence_fixture,      // periodic explicit sequence (test media)
  nonstationary_fixture, // negative control: index-dependent marginals
};

inline std::string to_string(DistributionKind k) {
  switch (k) {
  case DistributionKind::iid_discrete: return "iid_discrete";
  case DistributionKind::iid_uniform_box: return "iid_uniform_box";
  case DistributionKind::markov_shift: return "markov_shift";
  case DistributionKind::sequence_fixture: return "sequence_fixture";
  case DistributionKind::nonstationary_fixture: return "nonstationary_fixture";
  }
  return "?";
}

inline DistributionKind distribution_kind_from_string(const std::string& s) {
  for (auto k : {DistributionKind::iid_discrete, DistributionKind::iid_uniform_box, DistributionKind::markov_shift,
                 DistributionKind::sequence_fixture, DistributionKind::nonstationary_fixture})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown distribution kind '" + s + "'");
}

struct WeightedPotential {
  PotentialSpec potential;
  double probability = 0.0;
};

struct ParamBox {
  double delta_lo = 1.0;
  double delta_hi = 1.0;
  double epsilon_lo = 1.0;
  double epsilon_hi = 1.0;
};

// Per-order scaling of the base potential at an index; default is identity.
struct OrderScale {
  double delta = 1.0;
  double epsilon = 1.0;
};

struct DistributionSpec {
  DistributionKind kind = DistributionKind::iid_discrete;
  std::vector<WeightedPotential> support;      // iid_discrete
  ParamBox box;                                // iid_uniform_box, nonstationary_fixture
  std::vector<PotentialSpec> states;           // markov_shift states, sequence_fixture period
  std::vector<std::vector<double>> transition; // markov_shift
  int K = 1;
  std::vector<OrderScale> order_scales;        // empty: all orders share the base potential
  std::optional<ClassParams> cls;              // derived when absent

  static DistributionSpec deterministic(PotentialSpec p, int K = 1) {
    DistributionSpec s;
    s.kind = DistributionKind::iid_discrete;
    s.support = {{std::move(p), 1.0}};
    s.K = K;
    return s;
  }

  static DistributionSpec uniform_box(ParamBox box, int K = 1) {
    DistributionSpec s;
    s.kind = DistributionKind::iid_uniform_box;
    s.box = box;
    s.K = K;
    return s;
  }

  static DistributionSpec sequence(std::vector<PotentialSpec> period, int K = 1) {
    DistributionSpec s;
    s.kind = DistributionKind::sequence_fixture;
    s.states = std::move(period);
    s.K = K;
    return s;
  }

  OrderScale order_scale(int j) const {
    if (order_scales.empty()) return {};
    return order_scales.at(static_cast<std::size_t>(j - 1));
  }

  // Base (delta, epsilon) pairs that bound the family, for class derivation.
  std::vector<std::pair<double, double>> extreme_parameters() const {
    std::vector<std::pair<double, double>> out;
    auto push_scaled = [&](double dl, double ep) {
      for (int j = 1; j <= K; ++j) {
        const auto sc = order_scale(j);
        out.emplace_back(dl * sc.delta, ep * sc.epsilon);
      }
    };
    switch (kind) {
    case DistributionKind::iid_discrete:
      for (const auto& w : support) push_scaled(w.potential.delta, w.potential.epsilon);
      break;
    case DistributionKind::iid_uniform_box:
    case DistributionKind::nonstationary_fixture:
      for (double dl : {box.delta_lo, box.delta_hi})
        for (double ep : {box.epsilon_lo, box.epsilon_hi}) push_scaled(dl, ep);
      break;
    case DistributionKind::markov_shift:
    case DistributionKind::sequence_fixture:
      for (const auto& p : states) push_scaled(p.delta, p.epsilon);
      break;
    }
    return out;
  }

  ClassParams class_params() const {
    if (cls) return *cls;
    return derive_class_params(extreme_parameters());
  }

  std::vector<std::string> violations() const;

  void validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
  }
};

namespace detail {

inline std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& P) {
  const std::size_t n = P.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int it = 0; it < 100000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) next[b] += pi[a] * P[a][b];
    double diff = 0.0;
    for (std::size_t a = 0; a < n; ++a) diff = std::max(diff, std::abs(next[a] - pi[a]));
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  const double s = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& p : pi) p /= s;
  return pi;
}

// Primitive (irreducible and aperiodic) iff some power up to the Wielandt
// bound (n-1)^2 + 1 is entrywise positive.
inline bool is_primitive(const std::vector<std::vector<double>>& P) {
  const std::size_t n = P.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) reach[a][b] = P[a][b] > 0.0;
  const std::size_t bound = (n - 1) * (n - 1) + 1;
  auto current = reach;
  for (std::size_t k = 1; k <= bound; ++k) {
    bool all = true;
    for (std::size_t a = 0; a < n && all; ++a)
      for (std::size_t b = 0; b < n && all; ++b) all = current[a][b] != 0;
    if (all) return true;
    std::vector<std::vector<char>> nxt(n, std::vector<char>(n, 0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t m = 0; m < n; ++m)
        if (current[a][m])
          for (std::size_t b = 0; b < n; ++b)
            if (reach[m][b]) nxt[a][b] = 1;
    current.swap(nxt);
  }
  return false;
}

inline std::size_t sample_categorical(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

} // namespace detail

inline std::vector<std::string> DistributionSpec::violations() const {
  std::vector<std::string> v;
  if (K < 1) v.push_back("K must be >= 1");
  if (!order_scales.empty() && static_cast<int>(order_scales.size()) != K)
    v.push_back("order_scales must have exactly K entries");
  for (const auto& sc : order_scales)
    if (!(sc.delta > 0.0 && sc.epsilon > 0.0)) v.push_back("order_scales entries must be positive");

  auto check_potential = [&](const PotentialSpec& p, const std::string& where) {
    try {
      p.validate();
    } catch (const ValidationError& e) {
      for (const auto& s : e.violations()) v.push_back(where + ": " + s);
    }
    if (p.kind == PotentialKind::registered_general && !order_scales.empty())
      for (const auto& sc : order_scales)
        if (sc.delta != 1.0 || sc.epsilon != 1.0)
          v.push_back(where + ": registered potentials cannot be rescaled per order");
  };

  switch (kind) {
  case DistributionKind::iid_discrete: {
    if (support.empty()) v.push_back("iid_discrete needs a non-empty support");
    double total = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (!(support[k].probability >= 0.0)) v.push_back("support[" + std::to_string(k) + "].probability must be >= 0");
      total += support[k].probability;
      check_potential(support[k].potential, "support[" + std::to_string(k) + "]");
    }
    if (!support.empty() && std::abs(total - 1.0) > 1e-12) v.push_back("support probabilities must sum to 1 (got " + format_double(total) + ")");
    break;
  }
  case DistributionKind::iid_uniform_box:
  case DistributionKind::nonstationary_fixture:
    if (!(box.delta_lo > 0.0 && box.delta_lo <= box.delta_hi)) v.push_back("box.delta must be an interval in (0,inf)");
    if (!(box.epsilon_lo > 0.0 && box.epsilon_lo <= box.epsilon_hi)) v.push_back("box.epsilon must be an interval in (0,inf)");
    break;
  case DistributionKind::markov_shift: {
    const std::size_t n = states.size();
    if (n == 0) v.push_back("markov_shift needs at least one state");
    if (transition.size() != n) v.push_back("transition must be square with one row per state");
    bool rows_ok = transition.size() == n;
    for (std::size_t a = 0; a < transition.size(); ++a) {
      if (transition[a].size() != n) {
        v.push_back("transition row " + std::to_string(a) + " has wrong length");
        rows_ok = false;
        continue;
      }
      double s = 0.0;
      for (double p : transition[a]) {
        if (!(p >= 0.0)) v.push_back("transition entries must be >= 0");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) {
        v.push_back("transition row " + std::to_string(a) + " must sum to 1");
        rows_ok = false;
      }
    }
    if (rows_ok && n > 0 && !detail::is_primitive(transition))
      v.push_back("transition matrix must be irreducible and aperiodic");
    for (std::size_t k = 0; k < states.size(); ++k) check_potential(states[k], "states[" + std::to_string(k) + "]");
    break;
  }
  case DistributionKind::sequence_fixture:
    if (states.empty()) v.push_back("sequence_fixture needs a non-empty period");
    for (std::size_t k = 0; k < states.size(); ++k) check_potential(states[k], "states[" + std::to_string(k) + "]");
    break;
  }
  if (cls) {
    for (const auto& s : cls->violations()) v.push_back(s);
  }
  if (v.empty()) {
    const ClassParams c = class_params();
    for (auto [dl, ep] : extreme_parameters()) {
      (void)ep;
      if (!(dl > 1.0 / c.d && dl < c.d))
        v.push_back("delta=" + format_double(dl) + " outside (1/d, d) for d=" + format_double(c.d));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Realizations.

class Medium {
public:
  virtual ~Medium() = default;
  // Base potential at lattice index i (orders are derived by OrderScale).
  virtual PotentialSpec base_at(std::int64_t i) const = 0;
};

namespace detail {

inline constexpr std::uint64_t kStreamSelect = 1;
inline constexpr std::uint64_t kStreamDelta = 2;
inline constexpr std::uint64_t kStreamEpsilon = 3;
inline constexpr std::uint64_t kStreamMarkov = 4;

class DiscreteMedium final : public Medium {
public:
  DiscreteMedium(std::vector<WeightedPotential> support, std::uint64_t seed) : seed_(seed) {
    for (auto& w : support) {
      probs_.push_back(w.probability);
      pots_.push_back(std::move(w.potential));
    }
  }
  PotentialSpec base_at(std::int64_t i) const override {
    if (pots_.size() == 1) return pots_[0];
    return pots_[sample_categorical(probs_, uniform01(seed_, i, kStreamSelect))];
  }

private:
  std::uint64_t seed_;
  std::vector<double> probs_;
  std::vector<PotentialSpec> pots_;
};

class UniformBoxMedium final : public Medium {
public:
  UniformBoxMedium(ParamBox box, std::uint64_t seed) : box_(box), seed_(seed) {}
  PotentialSpec base_at(std::int64_t i) const override {
    PotentialSpec p;
    p.delta = box_.delta_lo + (box_.delta_hi - box_.delta_lo) * uniform01(seed_, i, kStreamDelta);
    p.epsilon = box_.epsilon_lo + (box_.epsilon_hi - box_.epsilon_lo) * uniform01(seed_, i, kStreamEpsilon);
    return p;
  }

private:
  ParamBox box_;
  std::uint64_t seed_;
};

// Hidden stationary Markov chain: X_0 ~ pi, forward with P for i > 0 and
// backward with the time reversal for i < 0. The realized path is cached
// behind a mutex; every step is keyed by (seed, i) so the path is independent
// of query order.
class MarkovMedium final : public Medium {
public:
  MarkovMedium(std::vector<PotentialSpec> states, std::vector<std::vector<double>> P, std::uint64_t seed)
      : states_(std::move(states)), P_(std::move(P)), seed_(seed) {
    pi_ = stationary_distribution(P_);
    const std::size_t n = P_.size();
    Prev_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) Prev_[a][b] = pi_[a] > 0.0 ? pi_[b] * P_[b][a] / pi_[a] : 0.0;
    forward_.push_back(sample_categorical(pi_, uniform01(seed_, 0, kStreamMarkov)));
  }

  PotentialSpec base_at(std::int64_t i) const override { return states_[state_at(i)]; }

  std::size_t state_at(std::int64_t i) const {
    std::lock_guard lock(mu_);
    if (i >= 0) {
      const auto idx = static_cast<std::size_t>(i);
      while (forward_.size() <= idx) {
        const auto k = static_cast<std::int64_t>(forward_.size());
        forward_.push_back(sample_categorical(P_[forward_.back()], uniform01(seed_, k, kStreamMarkov)));
      }
      return forward_[idx];
    }
    const auto idx = static_cast<std::size_t>(-i) - 1; // backward_[0] is index -1
    while (backward_.size() <= idx) {
      const std::size_t prev = backward_.empty() ? forward_[0] : backward_.back();
      const auto k = -static_cast<std::int64_t>(backward_.size()) - 1;
      backward_.push_back(sample_categorical(Prev_[prev], uniform01(seed_, k, kStreamMarkov)));
    }
    return backward_[idx];
  }

  const std::vector<double>& stationary() const { return pi_; }

private:
  std::vector<PotentialSpec> states_;
  std::vector<std::vector<double>> P_;
  std::vector<std::vector<double>> Prev_;
  std::vector<double> pi_;
  std::uint64_t seed_;
  mutable std::mutex mu_;
  mutable std::vector<std::size_t> forward_;
  mutable std::vector<std::size_t> backward_;
};

class SequenceMedium final : public Medium {
public:
  explicit SequenceMedium(std::vector<PotentialSpec> period) : period_(std::move(period)) {}
  PotentialSpec base_at(std::int64_t i) const override {
    const auto n = static_cast<std::int64_t>(period_.size());
    return period_[static_cast<std::size_t>(((i % n) + n) % n)];
  }

private:
  std::vector<PotentialSpec> period_;
};

// Reads the |i|-th output of a minimal-standard LCG seeded with the raw seed.
// Small consecutive seeds make the first outputs cluster near zero, so the
// marginal law depends on the index.
class NonstationaryFixtureMedium final : public Medium {
public:
  NonstationaryFixtureMedium(ParamBox box, std::uint64_t seed) : box_(box), seed_(seed) {}
  PotentialSpec base_at(std::int64_t i) const override {
    constexpr std::uint64_t m = 2147483647ULL;
    std::uint64_t s = seed_ % m;
    if (s == 0) s = 1;
    const std::uint64_t k = static_cast<std::uint64_t>(i < 0 ? -i : i) + 1;
    const double u = static_cast<double>(mulmod(powmod(16807ULL, k, m), s, m)) / static_cast<double>(m);
    PotentialSpec p;
    p.delta = box_.delta_lo + (box_.delta_hi - box_.delta_lo) * u;
    p.epsilon = box_.epsilon_lo + (box_.epsilon_hi - box_.epsilon_lo) * u;
    return p;
  }

private:
  static std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) { return (a * b) % m; }
  static std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    b %= m;
    while (e > 0) {
      if (e & 1U) r = mulmod(r, b, m);
      b = mulmod(b, b, m);
      e >>= 1U;
    }
    return r;
  }
  ParamBox box_;
  std::uint64_t seed_;
};

} // namespace detail

// A realized medium omega together with a root offset (the group action
// tau_k re-roots the index map).
class ChainModel {
public:
  ChainModel() = default;

  ChainModel(DistributionSpec spec, std::uint64_t seed, std::shared_ptr<const Medium> medium,
             std::int64_t offset = 0)
      : spec_(std::make_shared<const DistributionSpec>(std::move(spec))), seed_(seed),
        medium_(std::move(medium)), offset_(offset), cls_(spec_->class_params()) {}

  int K() const { return spec_->K; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t offset() const { return offset_; }
  const DistributionSpec& spec() const { return *spec_; }
  const ClassParams& class_params() const { return cls_; }
  const Medium& medium() const { return *medium_; }

  PotentialSpec potential_at(std::int64_t i, int j = 1) const {
    if (j < 1 || j > spec_->K) throw PreconditionError("potential_at: order j must be in [1, K]");
    PotentialSpec p = medium_->base_at(i + offset_);
    const auto sc = spec_->order_scale(j);
    if (sc.delta != 1.0 || sc.epsilon != 1.0) {
      p.delta *= sc.delta;
      p.epsilon *= sc.epsilon;
    }
    return p;
  }

  // tau_k: the potential at index i of the result is the potential at i+k here.
  ChainModel shift(std::int64_t k) const {
    ChainModel m = *this;
    m.offset_ += k;
    return m;
  }

private:
  std::shared_ptr<const DistributionSpec> spec_;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const Medium> medium_;
  std::int64_t offset_ = 0;
  ClassParams cls_{};
};

inline ChainModel build(const DistributionSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::shared_ptr<const Medium> medium;
  switch (spec.kind) {
  case DistributionKind::iid_discrete:
    medium = std::make_shared<detail::DiscreteMedium>(spec.support, seed);
    break;
  case DistributionKind::iid_uniform_box:
    medium = std::make_shared<detail::UniformBoxMedium>(spec.box, seed);
    break;
  case DistributionKind::markov_shift:
    medium = std::make_shared<detail::MarkovMedium>(spec.states, spec.transition, seed);
    break;
  case DistributionKind::sequence_fixture:
    medium = std::make_shared<detail::SequenceMedium>(spec.states);
    break;
  case DistributionKind::nonstationary_fixture:
    medium = std::make_shared<detail::NonstationaryFixtureMedium>(spec.box, seed);
    break;
  }
  return ChainModel(spec, seed, std::move(medium));
}

// ---------------------------------------------------------------------------
// Sample averages and expectations.

enum class Quantity { delta, epsilon, J_at_delta, holder_coeff };

// Integers i with N*a <= i < N*b.
struct IndexRange {
  std::int64_t first = 0;
  std::int64_t count = 0;
};

inline IndexRange window_indices(std::int64_t N, double a, double b) {
  if (N < 1) throw PreconditionError("window: N must be >= 1");
  if (!(a < b)) throw PreconditionError("window: need a < b");
  const double na = static_cast<double>(N) * a;
  const double nb = static_cast<double>(N) * b;
  const auto first = static_cast<std::int64_t>(std::ceil(na - 1e-9 * std::max(1.0, std::abs(na))));
  const auto end = static_cast<std::int64_t>(std::ceil(nb - 1e-9 * std::max(1.0, std::abs(nb))));
  return {first, std::max<std::int64_t>(0, end - first)};
}

inline double quantity_of(const PotentialSpec& p, Quantity q, double alpha) {
  switch (q) {
  case Quantity::delta: return minimizer(p).first;
  case Quantity::epsilon: return -minimizer(p).second;
  case Quantity::J_at_delta: return minimizer(p).second;
  case Quantity::holder_coeff: return holder_coefficient(p, alpha);
  }
  return 0.0;
}

inline double sample_average(const ChainModel& model, Quantity q, int j, std::int64_t N, double a = 0.0,
                             double b = 1.0) {
  const auto r = window_indices(N, a, b);
  if (r.count == 0) throw PreconditionError("sample_average: empty index set");
  const double alpha = model.class_params().alpha;
  double sum = 0.0;
  for (std::int64_t i = r.first; i < r.first + r.count; ++i) sum += quantity_of(model.potential_at(i, j), q, alpha);
  return sum / static_cast<double>(r.count);
}

inline double expectation(const DistributionSpec& spec, Quantity q, int j = 1) {
  if (q == Quantity::holder_coeff) throw UnsupportedError("expectation: no closed form for the Hoelder coefficient");
  const auto sc = spec.order_scale(j);
  auto value = [&](const PotentialSpec& p) {
    PotentialSpec s = p;
    s.delta *= sc.delta;
    s.epsilon *= sc.epsilon;
    return quantity_of(s, q, 1.0);
  };
  switch (spec.kind) {
  case DistributionKind::iid_discrete: {
    double e = 0.0;
    for (const auto& w : spec.support) e += w.probability * value(w.potential);
    return e;
  }
  case DistributionKind::iid_uniform_box: {
    const double ed = 0.5 * (spec.box.delta_lo + spec.box.delta_hi) * sc.delta;
    const double ee = 0.5 * (spec.box.epsilon_lo + spec.box.epsilon_hi) * sc.epsilon;
    if (q == Quantity::delta) return ed;
    if (q == Quantity::epsilon) return ee;
    return -ee;
  }
  case DistributionKind::markov_shift: {
    const auto pi = detail::stationary_distribution(spec.transition);
    double e = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) e += pi[k] * value(spec.states[k]);
    return e;
  }
  case DistributionKind::sequence_fixture: {
    double e = 0.0;
    for (const auto& p : spec.states) e += value(p);
    return e / static_cast<double>(spec.states.size());
  }
  case DistributionKind::nonstationary_fixture:
    throw UnsupportedError("expectation: the nonstationary fixture has no invariant law");
  }
  return 0.0;
}

// Running averages of the Hoelder coefficient over growing sample sizes.
// `growing` flags a sequence that keeps increasing by more than 10% per step,
// which is how a violation of the integrability assumption shows up.
struct HolderAudit {
  std::vector<std::int64_t> sizes;
  std::vector<double> averages;
  bool growing = false;
};

inline HolderAudit holder_audit(const ChainModel& model, const std::vector<std::int64_t>& sizes, int j = 1) {
  HolderAudit a;
  a.sizes = sizes;
  for (auto n : sizes) a.averages.push_back(sample_average(model, Quantity::holder_coeff, j, n));
  if (a.averages.size() >= 3) {
    bool grow = true;
    for (std::size_t k = 1; k < a.averages.size(); ++k) grow = grow && a.averages[k] > 1.1 * a.averages[k - 1];
    a.growing = grow;
  }
  return a;
}

} // namespace homchain
