#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wot/bitvec.hpp"
#include "wot/bounds.hpp"
#include "wot/channel.hpp"
#include "wot/hash.hpp"
#include "wot/rng.hpp"

namespace wot {

// All tunables of one protocol instance. delta is the typicality slack on the
// erasure counts; delta_bar and delta_tilde shave the two hash output lengths
// below the respective entropy rates. delta_bar <= 0 means "auto": half the
// available margin alpha*(eps3 - delta).
struct ProtocolConfig {
  size_t n = 0;          // block length
  double r = 0.0;        // target rate, strings are ~ r*n bits
  ChannelParams eps;
  double alpha = 0.02;   // fraction of coordinates spent on the shared bit
  double delta = 0.05;
  double delta_bar = -1.0;
  double delta_tilde = 0.01;
  int max_resends = 16;
  uint64_t seed = 0;
  // test-only ablation: drop the shared-bit mask from label assignment and
  // ciphertext ordering (send the position-0 string first, always)
  bool ablate_order_mask = false;

  double beta() const { return r / eps.eps3; }
  double delta_bar_effective() const {
    return delta_bar > 0.0 ? delta_bar : 0.5 * alpha * (eps.eps3 - delta);
  }
};

struct ProtocolDimensions {
  size_t n_alpha = 0;     // |L_alpha|
  size_t n_beta = 0;      // |G| = |B|
  size_t k = 0;           // string length
  size_t f_alpha_out = 0; // output bits of the shared-bit hash
  int case_id = 0;        // 1, 2 or 3 (by beta vs eps1 and 1/2)
  size_t overlap = 0;     // |G ∩ B|, nonzero only in case 3
};

// Feasibility gate + integer dimension derivation. Every count is floored
// once here and reused everywhere so hash shapes and string lengths can never
// drift apart.
inline ProtocolDimensions derive_dimensions(const ProtocolConfig& cfg) {
  cfg.eps.validate();
  const double e1 = cfg.eps.eps1, e2 = cfg.eps.eps2, e3 = cfg.eps.eps3;
  if (cfg.n < 1) throw std::invalid_argument("config: n must be >= 1");
  if (!(cfg.r > 0.0 && cfg.r < 1.0)) throw std::invalid_argument("config: r must be in (0,1)");
  if (e2 < e3)
    throw std::invalid_argument("config: eps2 < eps3 (protocol regime requires eps2 >= eps3)");
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("config: delta must be > 0");
  double cap = std::min({e3 * (1.0 - e1), e1 - 2.0 * cfg.delta,
                         0.5 * (e1 * e2 + e3 * (1.0 - e1))});
  if (!(cfg.r < cap))
    throw std::invalid_argument("config: rate infeasible (needs r < min(eps3(1-eps1), "
                                "eps1-2delta, (eps1 eps2 + eps3(1-eps1))/2))");
  double beta = cfg.beta();
  if (!(beta < 1.0 - e1)) throw std::invalid_argument("config: beta = r/eps3 must be < 1-eps1");
  if (!(cfg.alpha > 0.0 && beta + cfg.alpha <= 1.0))
    throw std::invalid_argument("config: need alpha > 0 and beta + alpha <= 1");
  double dbar = cfg.delta_bar_effective();
  if (!(dbar > 0.0 && dbar < cfg.alpha * (e3 - cfg.delta)))
    throw std::invalid_argument("config: delta_bar must lie in (0, alpha*(eps3-delta))");

  ProtocolDimensions d;
  double nd = static_cast<double>(cfg.n);
  // Counts are products of user-supplied decimals; a value within 1e-9 of an
  // integer is that integer (0.104/0.2*20000 must floor to 10400, not 10399).
  auto floor_count = [](double x) { return static_cast<size_t>(x + 1e-9); };
  d.n_alpha = floor_count(cfg.alpha * nd);
  d.n_beta = floor_count(beta * nd);
  d.k = floor_count((cfg.r - cfg.delta_tilde) * nd);
  d.f_alpha_out = floor_count((cfg.alpha * (e3 - cfg.delta) - dbar) * nd);
  if (d.k < 1) throw std::invalid_argument("config: k = floor(n(r-delta_tilde)) must be >= 1");
  if (d.f_alpha_out < 1)
    throw std::invalid_argument("config: shared-bit hash output length must be >= 1 "
                                "(raise n or alpha)");
  if (d.n_alpha < 1 || d.n_beta < 1)
    throw std::invalid_argument("config: n too small for the alpha/beta pools");

  if (beta <= e1 && beta <= 0.5)
    d.case_id = 1;
  else if (beta <= 0.5)
    d.case_id = 2;
  else
    d.case_id = 3;

  if (d.case_id == 3) {
    size_t outside = cfg.n - d.n_beta - d.n_alpha;  // beta+alpha<=1 keeps this >= 0
    if (outside > d.n_beta)
      throw std::invalid_argument("config: case-3 geometry inconsistent (beta too small)");
    d.overlap = d.n_beta - outside;
  }
  return d;
}

enum class TypicalityResult { Proceed, Abort };

// Bob aborts when the realized erasure pattern strays delta below either
// expected count; conditioned on Proceed, every later pool size is guaranteed.
inline TypicalityResult check_typicality(const TritVector& y, const ProtocolConfig& cfg) {
  double n = static_cast<double>(y.size());
  double e = static_cast<double>(count_erased(y));
  if (e < n * (cfg.eps.eps1 - cfg.delta)) return TypicalityResult::Abort;
  if (n - e < n * (1.0 - cfg.eps.eps1 - cfg.delta)) return TypicalityResult::Abort;
  return TypicalityResult::Proceed;
}

// Chernoff bound on the per-attempt abort probability.
inline double abort_probability_bound(const ProtocolConfig& cfg) {
  double n = static_cast<double>(cfg.n), e1 = cfg.eps.eps1, d = cfg.delta;
  return std::exp(-n * e1 * d * d / 2.0) + std::exp(-n * (1.0 - e1) * d * d / 2.0);
}

// First message (Bob -> Alice): coordinate set, hash, and the masked bit.
struct SharedBitMessage {
  std::vector<uint32_t> l_alpha;
  LinearHash f_alpha;
  int masked_s = 0;
};

struct SharedBitResult {
  SharedBitMessage msg;
  int s_bob = 0;
  int s_alice = 0;
};

namespace detail {

// Uniform size-k subset of pool, returned ascending. Partial Fisher-Yates.
inline std::vector<uint32_t> sample_subset(std::vector<uint32_t> pool, size_t k, Rng& rng,
                                           const char* what) {
  if (k > pool.size())
    throw std::runtime_error(std::string("pool exhaustion while drawing ") + what +
                             " (dimension bug)");
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace detail

// Bob picks n_alpha non-erased coordinates, hashes his received bits there,
// and masks a fresh private bit S with the first hash bit. Alice recovers S
// from her own copy of those bits; the two always agree because the selected
// coordinates are non-erased.
inline SharedBitResult phase1_shared_bit(const BitVec& x, const TritVector& y,
                                         const ProtocolDimensions& dims, Rng& rng_bob) {
  auto nonerased = nonerased_indices(y);
  if (nonerased.size() < dims.n_alpha)
    throw std::runtime_error("phase1: not enough non-erased coordinates (missing abort check?)");

  SharedBitResult res;
  res.msg.l_alpha = detail::sample_subset(std::move(nonerased), dims.n_alpha, rng_bob, "L_alpha");
  res.msg.f_alpha = sample_linear_hash(static_cast<uint32_t>(dims.n_alpha),
                                       static_cast<uint32_t>(dims.f_alpha_out), rng_bob);
  int k_alpha_bob = res.msg.f_alpha.apply(gather_bits(y, res.msg.l_alpha)).get(0);
  res.s_bob = rng_bob.bit();
  res.msg.masked_s = k_alpha_bob ^ res.s_bob;

  int k_alpha_alice = res.msg.f_alpha.apply(gather_bits(x, res.msg.l_alpha)).get(0);
  res.s_alice = res.msg.masked_s ^ k_alpha_alice;
  return res;
}

// Build the good set G (all Bob-non-erased) and the bad set B (holding at
// least n*r Bob-erased coordinates) of equal size n_beta.
inline std::pair<std::vector<uint32_t>, std::vector<uint32_t>> form_sets(
    const TritVector& y, const std::vector<uint32_t>& l_alpha, const ProtocolDimensions& dims,
    Rng& rng) {
  std::vector<uint32_t> free_nonerased;
  std::vector<uint32_t> all_erased;
  {
    std::vector<char> in_alpha(y.size(), 0);
    for (uint32_t i : l_alpha) in_alpha[i] = 1;
    for (uint32_t i = 0; i < y.size(); ++i) {
      if (erased(y[i]))
        all_erased.push_back(i);
      else if (!in_alpha[i])
        free_nonerased.push_back(i);
    }
  }

  auto g = detail::sample_subset(free_nonerased, dims.n_beta, rng, "G");

  std::vector<uint32_t> b;
  switch (dims.case_id) {
    case 1:
      // plenty of erased coordinates: B is a uniform erased subset
      b = detail::sample_subset(std::move(all_erased), dims.n_beta, rng, "B");
      break;
    case 2: {
      // every erased coordinate goes to B, topped up with fresh non-erased
      // ones untouched by G and L_alpha
      if (all_erased.size() > dims.n_beta)
        throw std::runtime_error("pool exhaustion: erased coordinates exceed |B| in case 2 "
                                 "(dimension bug)");
      std::vector<char> in_g(y.size(), 0);
      for (uint32_t i : g) in_g[i] = 1;
      std::vector<uint32_t> fresh;
      for (uint32_t i : free_nonerased)
        if (!in_g[i]) fresh.push_back(i);
      b = all_erased;
      auto fill = detail::sample_subset(std::move(fresh), dims.n_beta - b.size(), rng, "B fill");
      b.insert(b.end(), fill.begin(), fill.end());
      std::sort(b.begin(), b.end());
      break;
    }
    case 3: {
      // everything outside G and L_alpha, plus a uniform overlap inside G
      std::vector<char> in_g(y.size(), 0);
      for (uint32_t i : g) in_g[i] = 1;
      std::vector<char> in_alpha(y.size(), 0);
      for (uint32_t i : l_alpha) in_alpha[i] = 1;
      for (uint32_t i = 0; i < y.size(); ++i)
        if (!in_g[i] && !in_alpha[i]) b.push_back(i);
      auto reuse = detail::sample_subset(g, dims.overlap, rng, "B overlap");
      b.insert(b.end(), reuse.begin(), reuse.end());
      std::sort(b.begin(), b.end());
      if (b.size() != dims.n_beta)
        throw std::runtime_error("pool exhaustion: case-3 set sizes inconsistent (dimension bug)");
      break;
    }
    default:
      throw std::logic_error("form_sets: bad case_id");
  }
  return {std::move(g), std::move(b)};
}

// (L_0, L_1) = (G, B) iff c xor s == 0, else swapped.
inline std::pair<std::vector<uint32_t>, std::vector<uint32_t>> assign_labels(
    std::vector<uint32_t> g, std::vector<uint32_t> b, int c, int s) {
  if (g.size() != b.size()) throw std::invalid_argument("assign_labels: |G| != |B|");
  if ((c ^ s) == 0) return {std::move(g), std::move(b)};
  return {std::move(b), std::move(g)};
}

// Third message (Alice -> Bob): two fresh hashes and the two encrypted
// strings. Position j carries K_{j xor s}, so Bob's selected string always
// hides behind the hash of X over the set he can read.
struct EncryptedStringsMessage {
  LinearHash f0, f1;
  BitVec ct0, ct1;
};

inline EncryptedStringsMessage alice_respond(const BitVec& x, const std::vector<uint32_t>& l0,
                                             const std::vector<uint32_t>& l1, int s,
                                             const BitVec& k0, const BitVec& k1,
                                             const ProtocolDimensions& dims, Rng& rng_alice) {
  if (k0.size() != dims.k || k1.size() != dims.k)
    throw std::invalid_argument("alice_respond: input strings must have length k");
  EncryptedStringsMessage m;
  m.f0 = sample_linear_hash(static_cast<uint32_t>(dims.n_beta), static_cast<uint32_t>(dims.k),
                            rng_alice);
  m.f1 = sample_linear_hash(static_cast<uint32_t>(dims.n_beta), static_cast<uint32_t>(dims.k),
                            rng_alice);
  BitVec pad0 = m.f0.apply(gather_bits(x, l0));
  BitVec pad1 = m.f1.apply(gather_bits(x, l1));
  m.ct0 = (s == 0 ? k0 : k1) ^ pad0;
  m.ct1 = (s == 0 ? k1 : k0) ^ pad1;
  return m;
}

// Bob decrypts position c xor s with the hash of his received bits over
// L_{c xor s}; that set is G, readable in full, so decoding is exact.
inline BitVec bob_decode(const TritVector& y, const std::vector<uint32_t>& l0,
                         const std::vector<uint32_t>& l1, const EncryptedStringsMessage& msg,
                         int c, int s) {
  int j = c ^ s;
  const auto& lj = (j == 0) ? l0 : l1;
  BitVec received;
  try {
    received = gather_bits(y, lj);  // throws if any coordinate is erased
  } catch (const std::logic_error&) {
    throw std::logic_error("bob_decode: erased coordinate in Bob's selected set "
                           "(protocol violation)");
  }
  const LinearHash& fj = (j == 0) ? msg.f0 : msg.f1;
  return ((j == 0) ? msg.ct0 : msg.ct1) ^ fj.apply(received);
}

// Full public-channel message log, shared (as one object) by all three views.
struct Transcript {
  SharedBitMessage shared_bit;
  std::vector<uint32_t> l0, l1;
  EncryptedStringsMessage encrypted;
};

struct ViewAlice {
  BitVec k0, k1, x;
  uint64_t private_seed = 0;  // M
  std::shared_ptr<const Transcript> f;
};
struct ViewBob {
  int c = 0;
  TritVector y;
  uint64_t private_seed = 0;  // N
  std::shared_ptr<const Transcript> f;
};
struct ViewEve {
  TritVector z;
  std::shared_ptr<const Transcript> f;
};

struct ProtocolRun {
  BitVec k_hat;
  int resend_count = 0;
  ViewAlice v_a;
  ViewBob v_b;
  ViewEve v_e;
  // bookkeeping for audits and attack scoring (not part of any party's view
  // beyond its rightful owner)
  ProtocolConfig config;
  ProtocolDimensions dims;
  int s = 0;  // the shared bit Bob drew
  uint64_t run_seed = 0;

  // s as used for labels/ordering (zero under the ablation)
  int s_effective() const { return config.ablate_order_mask ? 0 : s; }
  // which label (0/1) points at the erasure-heavy set B
  int b_label() const { return 1 ^ (v_b.c ^ s_effective()); }
};

struct ResendLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One end-to-end execution: transmit (with typicality-abort resends), shared
// bit, set formation, label assignment, encrypted delivery, decode. The rng
// parameter only seeds three private substreams (channel noise, Alice, Bob),
// so trial farming with per-trial seeds stays deterministic.
inline ProtocolRun run_protocol(const ProtocolConfig& cfg, const BitVec& k0, const BitVec& k1,
                                int c, Rng& rng) {
  ProtocolDimensions dims = derive_dimensions(cfg);
  if (k0.size() != dims.k || k1.size() != dims.k)
    throw std::invalid_argument("run_protocol: input strings must have length k");

  uint64_t chan_seed = rng.next_u64();
  uint64_t alice_seed = rng.next_u64();
  uint64_t bob_seed = rng.next_u64();
  Rng chan_rng(chan_seed), alice_rng(alice_seed), bob_rng(bob_seed);

  ProtocolRun run;
  run.config = cfg;
  run.dims = dims;

  // fresh block each attempt; aborted blocks are discarded entirely
  BitVec x;
  TritVector y, z;
  int attempt = 0;
  for (;; ++attempt) {
    if (attempt > cfg.max_resends)
      throw ResendLimitExceeded("run_protocol: typicality abort limit reached");
    x = random_bits(cfg.n, alice_rng);
    std::tie(y, z) = transmit(x, cfg.eps, chan_rng);
    if (check_typicality(y, cfg) == TypicalityResult::Proceed) break;
  }
  run.resend_count = attempt;

  SharedBitResult sb = phase1_shared_bit(x, y, dims, bob_rng);
  if (sb.s_alice != sb.s_bob)
    throw std::logic_error("run_protocol: shared-bit recovery failed");  // impossible by design
  run.s = sb.s_bob;
  int s_bob = cfg.ablate_order_mask ? 0 : sb.s_bob;
  int s_alice = cfg.ablate_order_mask ? 0 : sb.s_alice;

  auto [g, b] = form_sets(y, sb.msg.l_alpha, dims, bob_rng);
  auto [l0, l1] = assign_labels(std::move(g), std::move(b), c, s_bob);

  EncryptedStringsMessage enc = alice_respond(x, l0, l1, s_alice, k0, k1, dims, alice_rng);
  run.k_hat = bob_decode(y, l0, l1, enc, c, s_bob);

  auto transcript = std::make_shared<Transcript>();
  transcript->shared_bit = std::move(sb.msg);
  transcript->l0 = std::move(l0);
  transcript->l1 = std::move(l1);
  transcript->encrypted = std::move(enc);

  run.v_a = {k0, k1, std::move(x), alice_seed, transcript};
  run.v_b = {c, std::move(y), bob_seed, transcript};
  run.v_e = {std::move(z), transcript};
  return run;
}

}  // namespace wot
