#include "unit/helpers.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "lexdiv/utf8.hpp"

namespace testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("lexdiv-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path data_path(const std::string& name) { return fs::path(LEXDIV_TEST_DATA_DIR) / name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string random_tweet_text(lexdiv::Rng& rng, std::size_t max_pieces) {
  static const std::vector<std::string> pieces = {
      "hello", "WORLD", "Great", "sooooo", "hahahaha", "hmmmm", "lol", ":)", ":-(", ";)", "<3", ":D", ":/",
      "#Tag", "##double", "#", "@user", "@", "a@b", "https://t.co/x", "www.site.org/p", "pic.twitter.com/z",
      "3:00 PM", "10am", "at 7 pm", "12:30", "!!!", "?!", "...", ",", "-", "'", "\"", "(", ")", "$9.99", "50%",
      "\xF0\x9F\x91\x8D", "\xF0\x9F\x8F\xBD", "\xE2\x80\x8D", "\xE2\x99\x80", "\xEF\xB8\x8F", "\xF0\x9F\x98\x82",
      "\xF0\x9F\x87\xBA\xF0\x9F\x87\xB8", "\xF0\x9F\x87\xBA", "\xC3\x89" "cole", "\xC3\xBC", "\xE2\x80\x99",
      "\xE2\x80\x94", "\xEF\xBC\xA0x", "\t", "\n", "  ", "ab", "ababab", "xyzxyzxyz", "aaa", "\xD0\x9F\xD1\x80\xD0\xB8",
      "_", "0", "99", "am", "pm", "at"};
  std::string out;
  const std::size_t n = rng.below(max_pieces + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rng.below(10);
    if (r < 7) {
      out += pieces[rng.below(pieces.size())];
    } else {
      // Random code point from a few blocks, including combining marks.
      static const std::pair<char32_t, char32_t> blocks[] = {
          {0x20, 0x7E}, {0xA0, 0x17F}, {0x300, 0x36F}, {0x400, 0x4FF}, {0x2000, 0x206F}, {0x1F300, 0x1F6FF}, {0x1F3FB, 0x1F3FF}};
      const auto& [lo, hi] = blocks[rng.below(std::size(blocks))];
      const char32_t c = static_cast<char32_t>(lo + rng.below(hi - lo + 1));
      out += lexdiv::utf8::encode(std::u32string(1, c));
    }
    if (rng.bernoulli(0.7)) out += ' ';
  }
  return out;
}

std::vector<lexdiv::annotate::TargetPassages> synthetic_targets(std::size_t n) {
  using lexdiv::Side;
  std::vector<lexdiv::annotate::TargetPassages> out;
  for (std::size_t t = 0; t < n; ++t) {
    lexdiv::annotate::TargetPassages tp;
    tp.target = "t" + std::to_string(t);
    for (std::size_t i = 0; i < 20; ++i) {
      for (Side side : {Side::Left, Side::Right}) {
        lexdiv::annotate::Passage p;
        const std::string tag = side == Side::Left ? "l" : "r";
        p.id = tp.target + "-" + tag + std::to_string(i);
        p.tweet_id = std::to_string(t * 1000 + i) + tag;
        p.user_id = "user-" + tag + std::to_string(i);
        p.side = side;
        p.target = tp.target;
        p.text_window = "passage " + std::to_string(i) + " about " + tp.target;
        p.full_len = p.text_window.size();
        (side == Side::Left ? tp.left : tp.right).push_back(std::move(p));
      }
    }
    out.push_back(std::move(tp));
  }
  return out;
}

}  // namespace testing
