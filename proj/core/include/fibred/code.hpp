#pragma once

#include <cstdint>
#include <functional>

#include <boost/container/small_vector.hpp>

namespace fibred {

using Word = std::uint64_t;

/// Packed payload of a morphism. Its meaning is private to the owning category;
/// small morphisms fit in one word, large tables spill to the heap.
using Code = boost::container::small_vector<Word, 2>;

/// Number of bits needed to store digits in [0, radix).
constexpr unsigned bits_for(std::uint64_t radix) noexcept {
  unsigned b = 0;
  while (radix > 1 && (std::uint64_t{1} << b) < radix) ++b;
  return b;
}

class BitWriter {
 public:
  void put(std::uint64_t value, unsigned width) {
    if (width == 0) return;
    const unsigned word = bit_ / 64, off = bit_ % 64;
    if (word >= code_.size()) code_.push_back(0);
    code_[word] |= value << off;
    if (off + width > 64) {
      code_.push_back(value >> (64 - off));
    }
    bit_ += width;
  }
  Code finish() && {
    if (code_.empty()) code_.push_back(0);
    return std::move(code_);
  }

 private:
  Code code_;
  unsigned bit_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const Code& code) : code_(code) {}
  std::uint64_t get(unsigned width) {
    if (width == 0) return 0;
    const unsigned word = bit_ / 64, off = bit_ % 64;
    std::uint64_t v = word < code_.size() ? code_[word] >> off : 0;
    if (off + width > 64 && word + 1 < code_.size()) v |= code_[word + 1] << (64 - off);
    bit_ += width;
    return width == 64 ? v : v & ((std::uint64_t{1} << width) - 1);
  }

 private:
  const Code& code_;
  unsigned bit_ = 0;
};

inline std::size_t hash_code(const Code& c) noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  for (Word w : c) h ^= std::hash<Word>{}(w) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace fibred
