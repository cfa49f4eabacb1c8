/*
 * Copyright 2026 The revtriage Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REVTRIAGE_UNICODE_HPP_
#define REVTRIAGE_UNICODE_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revtriage::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at `pos`, advancing `pos`. Ill-formed
// input yields one U+FFFD per maximal subpart of a valid sequence.
inline char32_t decode_next(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra = 0;
  char32_t cp = 0;
  unsigned char lo = 0x80, hi = 0xBF;  // allowed range of the second byte
  if (lead >= 0xC2 && lead <= 0xDF) {
    extra = 1, cp = lead & 0x1F;
  } else if (lead >= 0xE0 && lead <= 0xEF) {
    extra = 2, cp = lead & 0x0F;
    if (lead == 0xE0) lo = 0xA0;
    if (lead == 0xED) hi = 0x9F;
  } else if (lead >= 0xF0 && lead <= 0xF4) {
    extra = 3, cp = lead & 0x07;
    if (lead == 0xF0) lo = 0x90;
    if (lead == 0xF4) hi = 0x8F;
  } else {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const std::size_t at = pos + static_cast<std::size_t>(i);
    const unsigned char c = at < s.size() ? byte(at) : 0;
    const bool ok = i == 1 ? (c >= lo && c <= hi) : (c & 0xC0) == 0x80;
    if (!ok) {
      pos = at;
      return kReplacement;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += static_cast<std::size_t>(extra) + 1;
  return cp;
}

inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) out.push_back(decode_next(s, pos));
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Han ideographs, kana and Hangul syllables. Each one is a token by itself.
inline constexpr bool is_cjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x20000 && cp <= 0x2A6DF) || (cp >= 0x2A700 && cp <= 0x2EBEF) ||
         (cp >= 0x30000 && cp <= 0x323AF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0x2F800 && cp <= 0x2FA1F) || (cp >= 0x3040 && cp <= 0x309F) ||
         (cp >= 0x30A0 && cp <= 0x30FF) || (cp >= 0xAC00 && cp <= 0xD7AF);
}

namespace detail {

// Unicode Emoji property (Emoji=Yes); mirrors data/unicode/emoji_property.txt.
inline constexpr std::pair<char32_t, char32_t> kEmojiRanges[] = {
    {0x0023, 0x0023},
    {0x002A, 0x002A},
    {0x0030, 0x0039},
    {0x00A9, 0x00A9},
    {0x00AE, 0x00AE},
    {0x203C, 0x203C},
    {0x2049, 0x2049},
    {0x2122, 0x2122},
    {0x2139, 0x2139},
    {0x2194, 0x2199},
    {0x21A9, 0x21AA},
    {0x231A, 0x231B},
    {0x2328, 0x2328},
    {0x23CF, 0x23CF},
    {0x23E9, 0x23F3},
    {0x23F8, 0x23FA},
    {0x24C2, 0x24C2},
    {0x25AA, 0x25AB},
    {0x25B6, 0x25B6},
    {0x25C0, 0x25C0},
    {0x25FB, 0x25FE},
    {0x2600, 0x2604},
    {0x260E, 0x260E},
    {0x2611, 0x2611},
    {0x2614, 0x2615},
    {0x2618, 0x2618},
    {0x261D, 0x261D},
    {0x2620, 0x2620},
    {0x2622, 0x2623},
    {0x2626, 0x2626},
    {0x262A, 0x262A},
    {0x262E, 0x262F},
    {0x2638, 0x263A},
    {0x2640, 0x2640},
    {0x2642, 0x2642},
    {0x2648, 0x2653},
    {0x265F, 0x2660},
    {0x2663, 0x2663},
    {0x2665, 0x2666},
    {0x2668, 0x2668},
    {0x267B, 0x267B},
    {0x267E, 0x267F},
    {0x2692, 0x2697},
    {0x2699, 0x2699},
    {0x269B, 0x269C},
    {0x26A0, 0x26A1},
    {0x26A7, 0x26A7},
    {0x26AA, 0x26AB},
    {0x26B0, 0x26B1},
    {0x26BD, 0x26BE},
    {0x26C4, 0x26C5},
    {0x26C8, 0x26C8},
    {0x26CE, 0x26CF},
    {0x26D1, 0x26D1},
    {0x26D3, 0x26D4},
    {0x26E9, 0x26EA},
    {0x26F0, 0x26F5},
    {0x26F7, 0x26FA},
    {0x26FD, 0x26FD},
    {0x2702, 0x2702},
    {0x2705, 0x2705},
    {0x2708, 0x270D},
    {0x270F, 0x270F},
    {0x2712, 0x2712},
    {0x2714, 0x2714},
    {0x2716, 0x2716},
    {0x271D, 0x271D},
    {0x2721, 0x2721},
    {0x2728, 0x2728},
    {0x2733, 0x2734},
    {0x2744, 0x2744},
    {0x2747, 0x2747},
    {0x274C, 0x274C},
    {0x274E, 0x274E},
    {0x2753, 0x2755},
    {0x2757, 0x2757},
    {0x2763, 0x2764},
    {0x2795, 0x2797},
    {0x27A1, 0x27A1},
    {0x27B0, 0x27B0},
    {0x27BF, 0x27BF},
    {0x2934, 0x2935},
    {0x2B05, 0x2B07},
    {0x2B1B, 0x2B1C},
    {0x2B50, 0x2B50},
    {0x2B55, 0x2B55},
    {0x3030, 0x3030},
    {0x303D, 0x303D},
    {0x3297, 0x3297},
    {0x3299, 0x3299},
    {0x1F004, 0x1F004},
    {0x1F0CF, 0x1F0CF},
    {0x1F170, 0x1F171},
    {0x1F17E, 0x1F17F},
    {0x1F18E, 0x1F18E},
    {0x1F191, 0x1F19A},
    {0x1F1E6, 0x1F1FF},
    {0x1F201, 0x1F202},
    {0x1F21A, 0x1F21A},
    {0x1F22F, 0x1F22F},
    {0x1F232, 0x1F23A},
    {0x1F250, 0x1F251},
    {0x1F300, 0x1F321},
    {0x1F324, 0x1F393},
    {0x1F396, 0x1F397},
    {0x1F399, 0x1F39B},
    {0x1F39E, 0x1F3F0},
    {0x1F3F3, 0x1F3F5},
    {0x1F3F7, 0x1F4FD},
    {0x1F4FF, 0x1F53D},
    {0x1F549, 0x1F54E},
    {0x1F550, 0x1F567},
    {0x1F56F, 0x1F570},
    {0x1F573, 0x1F57A},
    {0x1F587, 0x1F587},
    {0x1F58A, 0x1F58D},
    {0x1F590, 0x1F590},
    {0x1F595, 0x1F596},
    {0x1F5A4, 0x1F5A5},
    {0x1F5A8, 0x1F5A8},
    {0x1F5B1, 0x1F5B2},
    {0x1F5BC, 0x1F5BC},
    {0x1F5C2, 0x1F5C4},
    {0x1F5D1, 0x1F5D3},
    {0x1F5DC, 0x1F5DE},
    {0x1F5E1, 0x1F5E1},
    {0x1F5E3, 0x1F5E3},
    {0x1F5E8, 0x1F5E8},
    {0x1F5EF, 0x1F5EF},
    {0x1F5F3, 0x1F5F3},
    {0x1F5FA, 0x1F64F},
    {0x1F680, 0x1F6C5},
    {0x1F6CB, 0x1F6D2},
    {0x1F6D5, 0x1F6D8},
    {0x1F6DC, 0x1F6E5},
    {0x1F6E9, 0x1F6E9},
    {0x1F6EB, 0x1F6EC},
    {0x1F6F0, 0x1F6F0},
    {0x1F6F3, 0x1F6FC},
    {0x1F7E0, 0x1F7EB},
    {0x1F7F0, 0x1F7F0},
    {0x1F90C, 0x1F93A},
    {0x1F93C, 0x1F945},
    {0x1F947, 0x1F9FF},
    {0x1FA70, 0x1FA7C},
    {0x1FA80, 0x1FA8A},
    {0x1FA8E, 0x1FAC6},
    {0x1FAC8, 0x1FAC8},
    {0x1FACD, 0x1FADC},
    {0x1FADF, 0x1FAEA},
    {0x1FAEF, 0x1FAF8},
};

}  // namespace detail

inline bool has_emoji_property(char32_t cp) {
  const auto* begin = std::begin(detail::kEmojiRanges);
  const auto* end = std::end(detail::kEmojiRanges);
  const auto* it = std::upper_bound(
      begin, end, cp,
      [](char32_t value, const auto& range) { return value < range.first; });
  if (it == begin) return false;
  --it;
  return cp <= it->second;
}

// Emoji for counting purposes: the Emoji property minus the ASCII code points
// (digits, '#', '*') that carry it only for keycap sequences.
inline bool is_emoji(char32_t cp) { return cp >= 0x80 && has_emoji_property(cp); }

// Word characters for tokenization. ASCII letters, digits and '_' qualify;
// non-ASCII code points qualify unless they are CJK (tokenized separately),
// emoji, or fall in a punctuation, symbol, space or control block.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= 'a' && cp <= 'z') || cp == '_';
  }
  if (is_cjk(cp) || is_emoji(cp)) return false;
  if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  if (cp >= 0xFF3B && cp <= 0xFF40) return false;
  if (cp >= 0xFF5B && cp <= 0xFF65) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  if (cp >= 0xE0000 && cp <= 0xE007F) return false;
  if (cp == kReplacement || cp == 0xFEFF) return false;
  return true;
}

// Case and width folding: fullwidth ASCII forms map to ASCII, the ideographic
// space to a plain space, and ASCII letters are lowercased.
inline constexpr char32_t fold(char32_t cp) {
  if (cp >= 0xFF01 && cp <= 0xFF5E) cp -= 0xFEE0;
  if (cp == 0x3000) cp = ' ';
  if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
  return cp;
}

inline std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t pos = 0; pos < s.size();) {
    append_utf8(out, fold(decode_next(s, pos)));
  }
  return out;
}

}  // namespace revtriage::unicode

#endif  // REVTRIAGE_UNICODE_HPP_
