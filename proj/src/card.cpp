#include "cyclone/card.hpp"

#include <bit>

namespace cyclone {

char color_char(Color c) { return kColorChar[color_index(c)]; }

std::optional<Color> parse_color(char c) {
  for (int i = 0; i < kNumColors; ++i)
    if (kColorChar[i] == c) return static_cast<Color>(i);
  return std::nullopt;
}

std::string to_string(Card card) {
  return std::string{color_char(card.color), static_cast<char>('0' + card.rank)};
}

std::optional<Card> parse_card(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  auto color = parse_color(text[0]);
  int rank = text[1] - '0';
  if (!color || rank < 1 || rank > kNumRanks) return std::nullopt;
  return Card{*color, rank};
}

int IdentityMask::size() const { return std::popcount(bits_); }

}  // namespace cyclone
