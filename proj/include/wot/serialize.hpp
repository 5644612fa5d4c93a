#pragma once

#include <string>
#include <vector>

#include "wot/protocol.hpp"

namespace wot {

namespace detail {

inline void append_index_set(std::string& out, const char* name,
                             const std::vector<uint32_t>& idx) {
  out += name;
  out += ' ';
  out += std::to_string(idx.size());
  for (uint32_t i : idx) {
    out += ' ';
    out += std::to_string(i);
  }
  out += '\n';
}

}  // namespace detail

// One record per public message, index sets as ascending decimal integers,
// hashes and bit strings in their hex formats. Pure text, so a given seed
// produces the same bytes on every platform.
inline std::string serialize_transcript(const Transcript& t) {
  std::string out = "transcript.v1\n";
  detail::append_index_set(out, "l_alpha", t.shared_bit.l_alpha);
  out += "f_alpha " + t.shared_bit.f_alpha.serialize() + "\n";
  out += "masked_s " + std::to_string(t.shared_bit.masked_s) + "\n";
  detail::append_index_set(out, "l0", t.l0);
  detail::append_index_set(out, "l1", t.l1);
  out += "f0 " + t.encrypted.f0.serialize() + "\n";
  out += "f1 " + t.encrypted.f1.serialize() + "\n";
  out += "ct0 " + t.encrypted.ct0.to_hex() + "\n";
  out += "ct1 " + t.encrypted.ct1.to_hex() + "\n";
  return out;
}

}  // namespace wot
