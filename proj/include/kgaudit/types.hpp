#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kgaudit {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

enum class Split : std::uint8_t { train = 0, valid = 1, test = 2 };

inline constexpr std::array<Split, 3> kAllSplits{Split::train, Split::valid, Split::test};

inline constexpr std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

/// Small bitmask over the three splits.
class SplitSet {
 public:
  constexpr SplitSet() = default;
  constexpr SplitSet(std::initializer_list<Split> splits) {
    for (Split s : splits) bits_ |= bit(s);
  }

  static constexpr SplitSet train_only() { return {Split::train}; }
  static constexpr SplitSet all() { return {Split::train, Split::valid, Split::test}; }

  constexpr bool has(Split s) const { return (bits_ & bit(s)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(SplitSet, SplitSet) = default;

 private:
  static constexpr std::uint8_t bit(Split s) { return std::uint8_t(1u << static_cast<unsigned>(s)); }
  std::uint8_t bits_ = 0;
};

/// Which side of the triple is being predicted.
/// `tail` answers (anchor, r, ?), `head` answers (?, r, anchor).
enum class Direction : std::uint8_t { head = 0, tail = 1 };

inline constexpr std::string_view direction_name(Direction d) {
  return d == Direction::head ? "head" : "tail";
}

struct Query {
  EntityId anchor = 0;
  RelationId relation = 0;
  Direction direction = Direction::tail;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Query that asks for the given side of `t`.
inline constexpr Query query_for(const Triple& t, Direction d) {
  return d == Direction::tail ? Query{t.head, t.relation, d} : Query{t.tail, t.relation, d};
}

/// The entity a query on `t` should recover.
inline constexpr EntityId truth_of(const Triple& t, Direction d) {
  return d == Direction::tail ? t.tail : t.head;
}

/// Completes a query with a candidate answer.
inline constexpr Triple complete(const Query& q, EntityId answer) {
  return q.direction == Direction::tail ? Triple{q.anchor, q.relation, answer}
                                        : Triple{answer, q.relation, q.anchor};
}

// Packed 64-bit keys used by the indices.
using PairKey = std::uint64_t;

inline constexpr PairKey pack(std::uint32_t hi, std::uint32_t lo) {
  return (PairKey{hi} << 32) | PairKey{lo};
}
inline constexpr std::uint32_t hi_of(PairKey k) { return std::uint32_t(k >> 32); }
inline constexpr std::uint32_t lo_of(PairKey k) { return std::uint32_t(k & 0xffffffffu); }
inline constexpr PairKey swap_pair(PairKey k) { return pack(lo_of(k), hi_of(k)); }

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = pack(t.head, t.tail) * 0x9E3779B97F4A7C15ull;
    h ^= (std::uint64_t{t.relation} + 0x632BE59BD9B4E019ull) + (h << 6) + (h >> 2);
    return std::hash<std::uint64_t>{}(h);
  }
};

}  // namespace kgaudit
