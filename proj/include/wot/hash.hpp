#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wot/bitvec.hpp"
#include "wot/rng.hpp"

namespace wot {

// Uniformly random binary matrix, i.e. a uniform draw from the family of all
// linear maps {0,1}^cols -> {0,1}^rows. Any two distinct inputs collide with
// probability exactly 2^-rows over the draw, which is what the key-extraction
// steps rely on.
struct LinearHash {
  uint32_t rows = 0;  // output length l
  uint32_t cols = 0;  // input length m
  std::vector<uint64_t> words;  // row-major, words_per_row() words per row

  size_t words_per_row() const { return (static_cast<size_t>(cols) + 63) / 64; }

  int bit(uint32_t r, uint32_t c) const {
    return static_cast<int>((words[r * words_per_row() + (c >> 6)] >> (c & 63)) & 1u);
  }
  void set_bit(uint32_t r, uint32_t c, int b) {
    uint64_t m = 1ull << (c & 63);
    auto& w = words[r * words_per_row() + (c >> 6)];
    if (b)
      w |= m;
    else
      w &= ~m;
  }

  // out_j = parity(row_j AND input). XOR-accumulating the ANDed words first is
  // valid because popcount parity is additive over XOR.
  int apply_row(uint32_t r, const BitVec& in) const {
    if (in.size() != cols) throw std::invalid_argument("LinearHash::apply_row: length mismatch");
    size_t wpr = words_per_row();
    const uint64_t* iw = in.words().data();
    const uint64_t* rw = words.data() + r * wpr;
    uint64_t acc = 0;
    for (size_t k = 0; k < wpr; ++k) acc ^= rw[k] & iw[k];
    return std::popcount(acc) & 1;
  }

  BitVec apply(const BitVec& in) const {
    if (in.size() != cols) throw std::invalid_argument("LinearHash::apply: length mismatch");
    BitVec out(rows);
    for (uint32_t r = 0; r < rows; ++r) out.set(r, apply_row(r, in));
    return out;
  }

  bool operator==(const LinearHash&) const = default;

  // "<l>,<m>:<hex>": all l*m bits packed row-major (bit index r*m+c), bytes in
  // increasing bit order, LSB-first bits per byte.
  std::string serialize() const {
    BitVec flat(static_cast<size_t>(rows) * cols);
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c)
        if (bit(r, c)) flat.set(static_cast<size_t>(r) * cols + c, 1);
    std::string payload = flat.to_hex();
    return std::to_string(rows) + "," + std::to_string(cols) +
           payload.substr(payload.find(':'));
  }

  static LinearHash parse(const std::string& s) {
    size_t comma = s.find(',');
    size_t colon = s.find(':');
    if (comma == std::string::npos || colon == std::string::npos || comma > colon)
      throw std::invalid_argument("LinearHash: bad header");
    uint32_t l = static_cast<uint32_t>(std::stoul(s.substr(0, comma)));
    uint32_t m = static_cast<uint32_t>(std::stoul(s.substr(comma + 1, colon - comma - 1)));
    BitVec flat = BitVec::from_hex(std::to_string(static_cast<size_t>(l) * m) + s.substr(colon));
    LinearHash h;
    h.rows = l;
    h.cols = m;
    h.words.assign(static_cast<size_t>(l) * h.words_per_row(), 0);
    for (uint32_t r = 0; r < l; ++r)
      for (uint32_t c = 0; c < m; ++c)
        if (flat.get(static_cast<size_t>(r) * m + c)) h.set_bit(r, c, 1);
    return h;
  }
};

// Draw every matrix bit i.i.d. uniform. The protocol only ever compresses, so
// expanding maps (l > m) are rejected as a misuse signal.
inline LinearHash sample_linear_hash(uint32_t m, uint32_t l, Rng& rng) {
  if (l < 1 || m < 1) throw std::invalid_argument("sample_linear_hash: zero dimension");
  if (l > m) throw std::invalid_argument("sample_linear_hash: output longer than input");
  LinearHash h;
  h.rows = l;
  h.cols = m;
  size_t wpr = h.words_per_row();
  h.words.resize(static_cast<size_t>(l) * wpr);
  uint64_t tail_mask = (m % 64 == 0) ? ~0ull : ((~0ull) >> (64 - m % 64));
  for (uint32_t r = 0; r < l; ++r) {
    uint64_t* rw = h.words.data() + r * wpr;
    for (size_t k = 0; k < wpr; ++k) rw[k] = rng.next_u64();
    rw[wpr - 1] &= tail_mask;
  }
  return h;
}

}  // namespace wot
