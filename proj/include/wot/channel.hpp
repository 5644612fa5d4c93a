#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wot/bitvec.hpp"
#include "wot/rng.hpp"

namespace wot {

// Broadcast erasure channel: Alice sends a bit, Bob's copy is erased with
// probability eps1; Eve's copy is erased with probability eps2 when Bob's was
// erased and eps3 when it was not. Neither output is ever flipped.
struct ChannelParams {
  double eps1 = 0.0;  // Bob erasure probability
  double eps2 = 0.0;  // Eve erasure probability given Bob erased
  double eps3 = 0.0;  // Eve erasure probability given Bob not erased

  bool valid() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    return in01(eps1) && in01(eps2) && in01(eps3);
  }
  void validate() const {
    if (!valid()) throw std::invalid_argument("ChannelParams: probabilities must be in [0,1]");
  }
  bool independent_eve() const { return eps2 == eps3; }  // IEBC
  bool degraded_eve() const { return eps2 == 1.0; }      // DEBC
};

enum class Trit : uint8_t { Zero = 0, One = 1, Erasure = 2 };

using TritVector = std::vector<Trit>;

inline bool erased(Trit t) { return t == Trit::Erasure; }

// Joint distribution of the per-coordinate (Bob, Eve) erasure pattern.
struct ErasurePatternDistribution {
  double p_ok_ok = 0.0;
  double p_ok_e = 0.0;
  double p_e_ok = 0.0;
  double p_e_e = 0.0;
};

inline ErasurePatternDistribution joint_law(const ChannelParams& p) {
  p.validate();
  return {(1.0 - p.eps1) * (1.0 - p.eps3), (1.0 - p.eps1) * p.eps3,
          p.eps1 * (1.0 - p.eps2), p.eps1 * p.eps2};
}

// One i.i.d. use of the broadcast channel per coordinate of x. Bob's erasure
// is drawn first, then Eve's conditioned on it (two Bernoulli draws per
// coordinate, in that fixed order).
inline std::pair<TritVector, TritVector> transmit(const BitVec& x, const ChannelParams& p,
                                                  Rng& rng) {
  p.validate();
  if (x.empty()) throw std::invalid_argument("transmit: empty input");
  size_t n = x.size();
  TritVector y(n), z(n);
  for (size_t i = 0; i < n; ++i) {
    Trit sent = static_cast<Trit>(x.get(i));
    bool bob_erased = rng.bernoulli(p.eps1);
    bool eve_erased = rng.bernoulli(bob_erased ? p.eps2 : p.eps3);
    y[i] = bob_erased ? Trit::Erasure : sent;
    z[i] = eve_erased ? Trit::Erasure : sent;
  }
  return {std::move(y), std::move(z)};
}

inline size_t count_erased(const TritVector& v) {
  size_t c = 0;
  for (Trit t : v) c += erased(t);
  return c;
}

inline std::vector<uint32_t> erased_indices(const TritVector& v) {
  std::vector<uint32_t> r;
  for (uint32_t i = 0; i < v.size(); ++i)
    if (erased(v[i])) r.push_back(i);
  return r;
}

inline std::vector<uint32_t> nonerased_indices(const TritVector& v) {
  std::vector<uint32_t> r;
  for (uint32_t i = 0; i < v.size(); ++i)
    if (!erased(v[i])) r.push_back(i);
  return r;
}

// Bits of x restricted to an index set (ascending), as a packed vector.
inline BitVec gather_bits(const BitVec& x, const std::vector<uint32_t>& idx) {
  BitVec r(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) r.set(j, x.get(idx[j]));
  return r;
}

// Same, reading a receiver's symbols; every selected symbol must be non-erased.
inline BitVec gather_bits(const TritVector& v, const std::vector<uint32_t>& idx) {
  BitVec r(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) {
    Trit t = v[idx[j]];
    if (erased(t)) throw std::logic_error("gather_bits: erased symbol selected");
    r.set(j, static_cast<int>(t));
  }
  return r;
}

}  // namespace wot
