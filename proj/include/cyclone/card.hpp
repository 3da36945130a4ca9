#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cyclone {

inline constexpr int kNumColors = 5;
inline constexpr int kNumRanks = 5;
inline constexpr int kNumIdentities = kNumColors * kNumRanks;
inline constexpr int kDeckSize = 50;
inline constexpr int kNumPlayers = 2;
inline constexpr int kHandSize = 5;
inline constexpr int kMaxInfoTokens = 8;
inline constexpr int kMaxStrikes = 3;
inline constexpr int kMaxScore = kNumColors * kNumRanks;

enum class Color : std::uint8_t { Red = 0, Yellow, Green, White, Blue };

inline constexpr std::array<char, kNumColors> kColorChar{'R', 'Y', 'G', 'W', 'B'};
inline constexpr std::array<std::string_view, kNumColors> kColorName{
    "red", "yellow", "green", "white", "blue"};

// Copies of each rank in a single suit: three 1s, two each of 2-4, one 5.
inline constexpr std::array<int, kNumRanks + 1> kCopiesPerRank{0, 3, 2, 2, 2, 1};

constexpr int copies_of_rank(int rank) { return kCopiesPerRank[rank]; }

struct Card {
  Color color = Color::Red;
  int rank = 1;  // 1..5

  // Dense index in [0, 25): color-major.
  constexpr int index() const { return static_cast<int>(color) * kNumRanks + (rank - 1); }
  static constexpr Card from_index(int idx) {
    return Card{static_cast<Color>(idx / kNumRanks), idx % kNumRanks + 1};
  }

  friend constexpr bool operator==(const Card&, const Card&) = default;
};

inline constexpr int color_index(Color c) { return static_cast<int>(c); }

std::string to_string(Card card);             // "R3"
std::optional<Card> parse_card(std::string_view text);
std::optional<Color> parse_color(char c);
char color_char(Color c);

/// Per-identity card counts over the 25 (color, rank) pairs.
class CardCounts {
 public:
  constexpr int operator[](int idx) const { return counts_[idx]; }
  constexpr int operator[](Card c) const { return counts_[c.index()]; }
  constexpr void add(Card c, int n = 1) { counts_[c.index()] += n; }
  constexpr void remove(Card c, int n = 1) { counts_[c.index()] -= n; }
  constexpr int total() const {
    int t = 0;
    for (int v : counts_) t += v;
    return t;
  }
  static constexpr CardCounts full_deck() {
    CardCounts counts;
    for (int i = 0; i < kNumIdentities; ++i)
      counts.counts_[i] = copies_of_rank(Card::from_index(i).rank);
    return counts;
  }
  friend constexpr bool operator==(const CardCounts&, const CardCounts&) = default;

 private:
  std::array<int, kNumIdentities> counts_{};
};

/// Per-suit top rank of the played stack, 0..5.
struct Fireworks {
  std::array<int, kNumColors> top{};

  constexpr int operator[](Color c) const { return top[color_index(c)]; }
  constexpr bool playable(Card c) const { return top[color_index(c.color)] + 1 == c.rank; }
  constexpr bool already_played(Card c) const { return c.rank <= top[color_index(c.color)]; }
  constexpr int score() const {
    int s = 0;
    for (int t : top) s += t;
    return s;
  }
  friend constexpr bool operator==(const Fireworks&, const Fireworks&) = default;
};

/// Bit set over the 25 card identities.
class IdentityMask {
 public:
  static constexpr std::uint32_t kAll = (1u << kNumIdentities) - 1;

  constexpr IdentityMask() = default;
  constexpr explicit IdentityMask(std::uint32_t bits) : bits_(bits & kAll) {}

  static constexpr IdentityMask all() { return IdentityMask(kAll); }
  static constexpr IdentityMask of(Card c) { return IdentityMask(1u << c.index()); }
  static constexpr IdentityMask of_color(Color c) {
    return IdentityMask(0x1Fu << (color_index(c) * kNumRanks));
  }
  static constexpr IdentityMask of_rank(int rank) {
    std::uint32_t bits = 0;
    for (int c = 0; c < kNumColors; ++c) bits |= 1u << (c * kNumRanks + rank - 1);
    return IdentityMask(bits);
  }

  constexpr bool contains(Card c) const { return (bits_ >> c.index()) & 1u; }
  constexpr bool contains(int idx) const { return (bits_ >> idx) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }
  int size() const;

  constexpr IdentityMask operator&(IdentityMask o) const { return IdentityMask(bits_ & o.bits_); }
  constexpr IdentityMask operator|(IdentityMask o) const { return IdentityMask(bits_ | o.bits_); }
  constexpr IdentityMask operator~() const { return IdentityMask(~bits_); }
  friend constexpr bool operator==(IdentityMask, IdentityMask) = default;

 private:
  std::uint32_t bits_ = 0;
};

}  // namespace cyclone
