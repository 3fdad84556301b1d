#pragma once

// Minimal UTF-8 and code point classification helpers. The tables cover the
// scripts and emoji blocks that show up in English-language social media text;
// they are not a substitute for full Unicode property data.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lexdiv::utf8 {

using CodePoint = char32_t;

inline constexpr CodePoint kReplacement = 0xFFFD;
inline constexpr CodePoint kZeroWidthJoiner = 0x200D;

// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view cps);
void append(std::string& out, CodePoint cp);

std::size_t length(std::string_view bytes);  // in code points

bool is_space(CodePoint cp);
bool is_ascii_digit(CodePoint cp);
bool is_letter(CodePoint cp);
bool is_upper(CodePoint cp);
CodePoint to_lower(CodePoint cp);
std::string to_lower(std::string_view bytes);
bool is_apostrophe(CodePoint cp);

// Pictographic emoji base characters.
bool is_emoji(CodePoint cp);
bool is_regional_indicator(CodePoint cp);
// Skin tone (U+1F3FB..U+1F3FF) and hair components (U+1F9B0..U+1F9B3).
bool is_emoji_modifier(CodePoint cp);
// Female/male signs used inside ZWJ sequences.
bool is_gender_sign(CodePoint cp);
// Code points that only decorate a preceding emoji: variation selectors,
// keycap combiner, tag characters, ZWJ.
bool is_emoji_decoration(CodePoint cp);

}  // namespace lexdiv::utf8
