#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wot/protocol.hpp"

namespace wot {

// ---------------------------------------------------------------------------
// Attack harness. Each attacker is a concrete guessing strategy for one bit it
// is not supposed to learn; the estimators report empirical accuracy, which
// should pin 1/2 for every honest-but-curious party and break away only when a
// protection is deliberately removed.
// ---------------------------------------------------------------------------

enum class AttackerId {
  AliceC,             // Alice guesses Bob's choice bit from X and the label sets
  EveC,               // Eve guesses the choice bit from Z and the transcript
  BobUnselectedBit,   // Bob decrypts the string he did not select
  EveKeyBit,          // Eve decrypts the first bit of the label-0 string
};

inline constexpr std::array<AttackerId, 4> all_attackers() {
  return {AttackerId::AliceC, AttackerId::EveC, AttackerId::BobUnselectedBit,
          AttackerId::EveKeyBit};
}

inline const char* attacker_name(AttackerId a) {
  switch (a) {
    case AttackerId::AliceC: return "alice-c";
    case AttackerId::EveC: return "eve-c";
    case AttackerId::BobUnselectedBit: return "bob-unselected-bit";
    case AttackerId::EveKeyBit: return "eve-key-bit";
  }
  throw std::logic_error("attacker_name: bad id");
}

inline AttackerId parse_attacker(std::string_view name) {
  for (AttackerId a : all_attackers())
    if (name == attacker_name(a)) return a;
  throw std::invalid_argument("unknown attacker: " + std::string(name));
}

namespace detail {

// Per-attacker stream tags keep coin flips independent across attackers that
// score the same run.
inline uint64_t attacker_tag(AttackerId a) {
  switch (a) {
    case AttackerId::AliceC: return 0xa11c;
    case AttackerId::EveC: return 0xe7ec;
    case AttackerId::BobUnselectedBit: return 0xb0b0;
    case AttackerId::EveKeyBit: return 0xe7eb;
  }
  throw std::logic_error("attacker_tag: bad id");
}

// Received bits over a coordinate set, with erasures replaced by fresh coin
// flips (the attacker's only option for coordinates it cannot see).
inline BitVec fill_from_trits(const TritVector& v, const std::vector<uint32_t>& idx, Rng& rng) {
  BitVec out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) {
    Trit t = v[idx[i]];
    out.set(i, erased(t) ? rng.bit() : (t == Trit::One ? 1 : 0));
  }
  return out;
}

}  // namespace detail

// The bit each attacker is scored against.
inline int attacker_target(const ProtocolRun& run, AttackerId a) {
  switch (a) {
    case AttackerId::AliceC:
    case AttackerId::EveC:
      return run.v_b.c;
    case AttackerId::BobUnselectedBit:
      return (run.v_b.c == 0 ? run.v_a.k1 : run.v_a.k0).get(0);
    case AttackerId::EveKeyBit:
      // label 0 carries the string Alice placed first, i.e. K_{s}
      return (run.s_effective() == 0 ? run.v_a.k0 : run.v_a.k1).get(0);
  }
  throw std::logic_error("attacker_target: bad id");
}

inline int attacker_guess(const ProtocolRun& run, AttackerId a, Rng& rng) {
  const Transcript& t = *run.v_e.f;
  switch (a) {
    case AttackerId::AliceC: {
      // Alice knows X everywhere and knows S (she unmasked it herself), so the
      // choice bit reduces to locating G among the two label sets. Her best
      // statistic is X itself, but X restricted to L_0 and L_1 is i.i.d.
      // uniform either way, so the comparison is exchangeable.
      size_t p0 = gather_bits(run.v_a.x, t.l0).popcount();
      size_t p1 = gather_bits(run.v_a.x, t.l1).popcount();
      int t_hat = (p0 != p1) ? (p0 > p1 ? 0 : 1) : rng.bit();
      return run.s_effective() ^ t_hat;
    }
    case AttackerId::EveC: {
      // Locating G is easy for Eve: she is erased at rate eps3 on G and at the
      // (weakly larger) rate eps2 on the part of B Bob lost, so the label set
      // where she sees more is likelier G.
      size_t e0 = 0, e1 = 0;
      for (uint32_t i : t.l0) e0 += erased(run.v_e.z[i]);
      for (uint32_t i : t.l1) e1 += erased(run.v_e.z[i]);
      int t_hat = (e0 != e1) ? (e0 < e1 ? 0 : 1) : rng.bit();
      if (run.config.ablate_order_mask) return t_hat;
      // With the mask in place she still needs S. The masked bit XORs S with
      // the first output bit of the shared-bit hash; she can strip it only if
      // every coordinate that bit depends on is visible to her.
      const LinearHash& fa = t.shared_bit.f_alpha;
      bool visible = true;
      int parity = 0;
      for (uint32_t col = 0; col < fa.cols; ++col) {
        if (!fa.bit(0, col)) continue;
        Trit tz = run.v_e.z[t.shared_bit.l_alpha[col]];
        if (erased(tz)) {
          visible = false;
          break;
        }
        parity ^= (tz == Trit::One);
      }
      int s_hat = visible ? (t.shared_bit.masked_s ^ parity) : rng.bit();
      return s_hat ^ t_hat;
    }
    case AttackerId::BobUnselectedBit: {
      // Decrypt the label Bob did not pick, coin-filling his erasures. That
      // label is B, which holds >= n*r of them, so the pad parity is a coin.
      int j = run.b_label();
      const auto& lj = (j == 0) ? t.l0 : t.l1;
      BitVec in = detail::fill_from_trits(run.v_b.y, lj, rng);
      const LinearHash& fj = (j == 0) ? t.encrypted.f0 : t.encrypted.f1;
      return ((j == 0) ? t.encrypted.ct0 : t.encrypted.ct1).get(0) ^ fj.apply_row(0, in);
    }
    case AttackerId::EveKeyBit: {
      BitVec in = detail::fill_from_trits(run.v_e.z, t.l0, rng);
      return t.encrypted.ct0.get(0) ^ t.encrypted.f0.apply_row(0, in);
    }
  }
  throw std::logic_error("attacker_guess: bad id");
}

struct AdvantageEstimate {
  double accuracy = 0.0;
  size_t trials = 0;
  double ci_halfwidth = 0.0;  // 4 sigma of the binomial proportion
};

namespace detail {

inline bool attacker_correct(const ProtocolRun& run, AttackerId a) {
  // Seeded from the run seed, the attacker tag, and a slab of X so hand-built
  // runs (all run_seed == 0) still get distinct coin-flip streams.
  Rng rng(mix_seed(mix_seed(run.run_seed, attacker_tag(a)), run.v_a.x.words()[0]));
  return attacker_guess(run, a, rng) == attacker_target(run, a);
}

inline AdvantageEstimate make_estimate(size_t correct, size_t trials) {
  AdvantageEstimate e;
  e.trials = trials;
  if (trials == 0) return e;
  e.accuracy = static_cast<double>(correct) / static_cast<double>(trials);
  e.ci_halfwidth = 4.0 * std::sqrt(e.accuracy * (1.0 - e.accuracy) / static_cast<double>(trials));
  return e;
}

}  // namespace detail

inline AdvantageEstimate estimate_advantage(std::span<const ProtocolRun> runs, AttackerId a) {
  if (runs.empty()) throw std::invalid_argument("estimate_advantage: no runs");
  size_t correct = 0;
  for (const ProtocolRun& run : runs) correct += detail::attacker_correct(run, a);
  return detail::make_estimate(correct, runs.size());
}

struct AttackBatchResult {
  std::vector<AttackerId> attackers;
  std::vector<AdvantageEstimate> estimates;  // aligned with attackers
  size_t trials = 0;
  size_t total_resends = 0;
};

// Streaming trial farm: one protocol run per trial, scored by every requested
// attacker and then discarded, so memory stays flat no matter the trial count.
// Per-trial seeds derive from the batch seed, making results independent of
// how trials are grouped into batches.
inline AttackBatchResult run_attack_batch(const ProtocolConfig& cfg,
                                          std::span<const AttackerId> attackers, size_t trials,
                                          uint64_t batch_seed) {
  ProtocolDimensions dims = derive_dimensions(cfg);
  AttackBatchResult out;
  out.attackers.assign(attackers.begin(), attackers.end());
  out.trials = trials;
  std::vector<size_t> correct(attackers.size(), 0);
  for (size_t trial = 0; trial < trials; ++trial) {
    uint64_t trial_seed = mix_seed(batch_seed, trial);
    Rng rng(trial_seed);
    BitVec k0 = random_bits(dims.k, rng);
    BitVec k1 = random_bits(dims.k, rng);
    int c = rng.bit();
    ProtocolRun run = run_protocol(cfg, k0, k1, c, rng);
    run.run_seed = trial_seed;
    out.total_resends += static_cast<size_t>(run.resend_count);
    for (size_t i = 0; i < attackers.size(); ++i)
      correct[i] += detail::attacker_correct(run, attackers[i]);
  }
  out.estimates.reserve(attackers.size());
  for (size_t i = 0; i < attackers.size(); ++i)
    out.estimates.push_back(detail::make_estimate(correct[i], trials));
  return out;
}

// ---------------------------------------------------------------------------
// Plug-in mutual information on discrete pairs, with the standard first-order
// bias size |A||B| / (2 N ln 2). Useful as a leakage smoke test: any feature
// of the adversary's view vs. the secret should sit under the bias floor.
// ---------------------------------------------------------------------------

struct MutualInformationEstimate {
  double mi_bits = 0.0;
  double bias_bits = 0.0;
};

inline MutualInformationEstimate plugin_mi(std::span<const std::pair<uint32_t, uint32_t>> pairs,
                                           size_t card_a, size_t card_b) {
  if (pairs.empty()) throw std::invalid_argument("plugin_mi: no samples");
  if (card_a < 1 || card_b < 1) throw std::invalid_argument("plugin_mi: empty alphabet");
  std::vector<double> joint(card_a * card_b, 0.0);
  std::vector<double> pa(card_a, 0.0), pb(card_b, 0.0);
  const double w = 1.0 / static_cast<double>(pairs.size());
  for (auto [a, b] : pairs) {
    if (a >= card_a || b >= card_b) throw std::out_of_range("plugin_mi: symbol outside alphabet");
    joint[a * card_b + b] += w;
    pa[a] += w;
    pb[b] += w;
  }
  double mi = 0.0;
  for (size_t a = 0; a < card_a; ++a)
    for (size_t b = 0; b < card_b; ++b) {
      double p = joint[a * card_b + b];
      if (p > 0.0) mi += p * std::log2(p / (pa[a] * pb[b]));
    }
  MutualInformationEstimate est;
  est.mi_bits = std::max(mi, 0.0);  // estimator is >= 0; clear rounding dust
  est.bias_bits = static_cast<double>(card_a) * static_cast<double>(card_b) /
                  (2.0 * static_cast<double>(pairs.size()) * std::log(2.0));
  return est;
}

// ---------------------------------------------------------------------------
// Per-run security margin audit: the unselected string is padded by a hash of
// X over B, and the pad keeps full min-entropy as long as B holds at least
// n*r coordinates Bob never received. Eve's margin counts her erasures on the
// part of B she alone would need (shared coordinates are discounted).
// ---------------------------------------------------------------------------

struct ErasureAudit {
  size_t bob_erasures_in_b = 0;
  size_t eve_erasures_in_b_exclusive = 0;
  double threshold = 0.0;  // n * r
  bool bob_margin_met() const { return static_cast<double>(bob_erasures_in_b) >= threshold; }
};

inline ErasureAudit renyi_erasure_audit(const ProtocolRun& run) {
  const Transcript& t = *run.v_e.f;
  const auto& bset = (run.b_label() == 0) ? t.l0 : t.l1;
  std::vector<uint32_t> shared;  // nonempty only when the sets overlap (case 3)
  std::set_intersection(t.l0.begin(), t.l0.end(), t.l1.begin(), t.l1.end(),
                        std::back_inserter(shared));
  ErasureAudit audit;
  audit.threshold = static_cast<double>(run.config.n) * run.config.r;
  size_t si = 0;
  for (uint32_t i : bset) {
    audit.bob_erasures_in_b += erased(run.v_b.y[i]);
    while (si < shared.size() && shared[si] < i) ++si;
    if (!(si < shared.size() && shared[si] == i))
      audit.eve_erasures_in_b_exclusive += erased(run.v_e.z[i]);
  }
  return audit;
}

// ---------------------------------------------------------------------------
// Abort accounting across stored runs. Each resend is one aborted attempt, so
// the observed rate is resends / (runs + resends); the analytic per-attempt
// bound comes from the shared config.
// ---------------------------------------------------------------------------

struct AbortStats {
  size_t runs = 0;
  size_t total_resends = 0;
  double observed_abort_rate = 0.0;
  double analytic_bound = 0.0;
};

inline AbortStats abort_statistics(std::span<const ProtocolRun> runs) {
  if (runs.empty()) throw std::invalid_argument("abort_statistics: no runs");
  AbortStats st;
  st.runs = runs.size();
  for (const ProtocolRun& r : runs) st.total_resends += static_cast<size_t>(r.resend_count);
  st.observed_abort_rate = static_cast<double>(st.total_resends) /
                           static_cast<double>(st.runs + st.total_resends);
  st.analytic_bound = abort_probability_bound(runs.front().config);
  return st;
}

}  // namespace wot
