#include "lexdiv/utf8.hpp"

namespace lexdiv::utf8 {

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int extra = 0;
    CodePoint cp = 0;
    CodePoint min = 0;
    if ((b0 & 0xE0) == 0xC0) {
      extra = 1; cp = b0 & 0x1F; min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2; cp = b0 & 0x0F; min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3; cp = b0 & 0x07; min = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; ok && k <= extra; ++k) {
      if (i + k >= n) { ok = false; break; }
      const auto b = static_cast<unsigned char>(bytes[i + k]);
      if ((b & 0xC0) != 0x80) { ok = false; break; }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

void append(std::string& out, CodePoint cp) {
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

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (CodePoint cp : cps) append(out, cp);
  return out;
}

std::size_t length(std::string_view bytes) {
  std::size_t n = 0;
  for (char c : bytes)
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  return n;
}

bool is_space(CodePoint cp) {
  if (cp <= 0x20) return true;  // ASCII controls and space
  if (cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) return true;
  return cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 ||
         cp == 0xFEFF;
}

bool is_ascii_digit(CodePoint cp) { return cp >= '0' && cp <= '9'; }

bool is_letter(CodePoint cp) {
  if (cp < 0x80)
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  if (cp == 0xAA || cp == 0xB5 || cp == 0xBA) return true;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x250 && cp <= 0x2AF) return true;           // IPA
  if (cp >= 0x300 && cp <= 0x36F) return true;           // combining marks
  if (cp >= 0x370 && cp <= 0x3FF) return cp != 0x37E && cp != 0x387;
  if (cp >= 0x400 && cp <= 0x52F) return cp < 0x482 || cp > 0x489;
  if (cp >= 0x531 && cp <= 0x587) return true;           // Armenian
  if (cp >= 0x5D0 && cp <= 0x5EA) return true;           // Hebrew
  if (cp >= 0x620 && cp <= 0x64A) return true;           // Arabic letters
  if (cp >= 0x900 && cp <= 0xDFF) return true;           // Indic
  if (cp >= 0xE01 && cp <= 0xE3A) return true;           // Thai
  if (cp >= 0x1100 && cp <= 0x11FF) return true;         // Hangul jamo
  if (cp >= 0x1E00 && cp <= 0x1FFF) return true;         // Latin/Greek ext
  if (cp >= 0x3041 && cp <= 0x30FF) return cp != 0x30FB; // kana
  if (cp >= 0x3400 && cp <= 0x4DBF) return true;
  if (cp >= 0x4E00 && cp <= 0x9FFF) return true;         // CJK
  if (cp >= 0xAC00 && cp <= 0xD7A3) return true;         // Hangul
  return false;
}

bool is_upper(CodePoint cp) { return to_lower(cp) != cp; }

CodePoint to_lower(CodePoint cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  return cp;
}

std::string to_lower(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (CodePoint cp : decode(bytes)) append(out, to_lower(cp));
  return out;
}

bool is_apostrophe(CodePoint cp) {
  return cp == '\'' || cp == 0x2019 || cp == 0x2018 || cp == 0x02BC;
}

bool is_emoji_modifier(CodePoint cp) {
  return (cp >= 0x1F3FB && cp <= 0x1F3FF) || (cp >= 0x1F9B0 && cp <= 0x1F9B3);
}

bool is_gender_sign(CodePoint cp) { return cp == 0x2640 || cp == 0x2642; }

bool is_regional_indicator(CodePoint cp) {
  return cp >= 0x1F1E6 && cp <= 0x1F1FF;
}

bool is_emoji_decoration(CodePoint cp) {
  return cp == 0xFE0E || cp == 0xFE0F || cp == 0x20E3 || cp == kZeroWidthJoiner ||
         (cp >= 0xE0020 && cp <= 0xE007F);
}

bool is_emoji(CodePoint cp) {
  if (is_emoji_modifier(cp)) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return true;
  if (cp >= 0x2600 && cp <= 0x27BF) return true;  // misc symbols, dingbats
  switch (cp) {
    case 0x231A: case 0x231B: case 0x2328: case 0x23CF:
    case 0x2B50: case 0x2B55: case 0x2B1B: case 0x2B1C:
    case 0x2B05: case 0x2B06: case 0x2B07: case 0x3030:
    case 0x303D: case 0x3297: case 0x3299:
      return true;
    default:
      break;
  }
  return (cp >= 0x23E9 && cp <= 0x23F3) || (cp >= 0x23F8 && cp <= 0x23FA);
}

}  // namespace lexdiv::utf8
