#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wot/rng.hpp"

namespace wot {

// Bit vector packed into 64-bit words, LSB-first inside each word. Bits past
// size() are kept zero so that operator== and hashing over words() stay
// canonical.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  int get(size_t i) const { return static_cast<int>((w_[i >> 6] >> (i & 63)) & 1u); }

  void set(size_t i, int b) {
    uint64_t m = 1ull << (i & 63);
    if (b)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }

  const std::vector<uint64_t>& words() const { return w_; }
  std::vector<uint64_t>& words() { return w_; }

  // clear any bits at positions >= n_ (call after writing raw words)
  void mask_tail() {
    if (n_ % 64 != 0 && !w_.empty()) w_.back() &= (~0ull) >> (64 - n_ % 64);
  }

  size_t popcount() const {
    size_t c = 0;
    for (uint64_t w : w_) c += static_cast<size_t>(std::popcount(w));
    return c;
  }

  BitVec operator^(const BitVec& o) const {
    if (n_ != o.n_) throw std::invalid_argument("BitVec xor: length mismatch");
    BitVec r(n_);
    for (size_t i = 0; i < w_.size(); ++i) r.w_[i] = w_[i] ^ o.w_[i];
    return r;
  }

  bool operator==(const BitVec& o) const = default;

  // "<nbits>:<hex>", bytes in increasing bit order, LSB-first bits per byte,
  // two lowercase hex digits per byte
  std::string to_hex() const {
    std::string s = std::to_string(n_) + ":";
    size_t nbytes = (n_ + 7) / 8;
    static const char* digits = "0123456789abcdef";
    for (size_t k = 0; k < nbytes; ++k) {
      uint8_t byte = static_cast<uint8_t>(w_[k >> 3] >> (8 * (k & 7)));
      s += digits[byte >> 4];
      s += digits[byte & 15];
    }
    return s;
  }

  static BitVec from_hex(const std::string& s) {
    size_t colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("BitVec: missing ':'");
    size_t n = std::stoull(s.substr(0, colon));
    BitVec v(n);
    size_t nbytes = (n + 7) / 8;
    if (s.size() - colon - 1 != 2 * nbytes)
      throw std::invalid_argument("BitVec: hex length mismatch");
    for (size_t k = 0; k < nbytes; ++k) {
      uint8_t byte = static_cast<uint8_t>(std::stoul(s.substr(colon + 1 + 2 * k, 2), nullptr, 16));
      v.w_[k >> 3] |= static_cast<uint64_t>(byte) << (8 * (k & 7));
    }
    v.mask_tail();
    return v;
  }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

inline BitVec random_bits(size_t n, Rng& rng) {
  BitVec v(n);
  for (auto& w : v.words()) w = rng.next_u64();
  v.mask_tail();
  return v;
}

}  // namespace wot
