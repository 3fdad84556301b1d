#include <algorithm>
#include <fstream>
#include <sstream>

#include "lexdiv/error.hpp"
#include "lexdiv/textprep.hpp"

namespace lexdiv::textprep {

namespace {

// Irregular forms and words the suffix rules would mangle.
constexpr std::pair<const char*, const char*> kExceptions[] = {
    {"ran", "run"}, {"was", "be"}, {"were", "be"}, {"is", "be"}, {"are", "be"}, {"am", "be"},
    {"been", "be"}, {"being", "be"}, {"has", "have"}, {"had", "have"}, {"having", "have"},
    {"does", "do"}, {"did", "do"}, {"done", "do"}, {"doing", "do"}, {"went", "go"}, {"gone", "go"},
    {"goes", "go"}, {"going", "go"}, {"said", "say"}, {"says", "say"}, {"made", "make"},
    {"came", "come"}, {"saw", "see"}, {"seen", "see"}, {"took", "take"}, {"taken", "take"},
    {"gave", "give"}, {"given", "give"}, {"got", "get"}, {"gotten", "get"}, {"knew", "know"},
    {"known", "know"}, {"thought", "think"}, {"told", "tell"}, {"found", "find"}, {"felt", "feel"},
    {"left", "leave"}, {"kept", "keep"}, {"brought", "bring"}, {"bought", "buy"}, {"sent", "send"},
    {"built", "build"}, {"spent", "spend"}, {"won", "win"}, {"lost", "lose"}, {"paid", "pay"},
    {"met", "meet"}, {"sat", "sit"}, {"stood", "stand"}, {"heard", "hear"}, {"held", "hold"},
    {"wrote", "write"}, {"written", "write"}, {"ate", "eat"}, {"eaten", "eat"}, {"drove", "drive"},
    {"driven", "drive"}, {"began", "begin"}, {"begun", "begin"}, {"sang", "sing"}, {"sung", "sing"},
    {"spoke", "speak"}, {"spoken", "speak"}, {"broke", "break"}, {"broken", "break"},
    {"chose", "choose"}, {"chosen", "choose"}, {"fell", "fall"}, {"fallen", "fall"},
    {"forgot", "forget"}, {"forgotten", "forget"}, {"flew", "fly"}, {"flown", "fly"},
    {"grew", "grow"}, {"grown", "grow"}, {"threw", "throw"}, {"thrown", "throw"},
    {"wore", "wear"}, {"worn", "wear"}, {"woke", "wake"}, {"taught", "teach"}, {"caught", "catch"},
    {"fought", "fight"}, {"sought", "seek"}, {"slept", "sleep"}, {"led", "lead"}, {"fed", "feed"},
    {"ridden", "ride"}, {"rode", "ride"}, {"rose", "rise"}, {"risen", "rise"}, {"shot", "shoot"},
    {"children", "child"}, {"men", "man"}, {"women", "woman"}, {"people", "people"},
    {"mice", "mouse"}, {"feet", "foot"}, {"teeth", "tooth"}, {"geese", "goose"},
    {"lives", "life"}, {"wives", "wife"}, {"knives", "knife"}, {"leaves", "leaf"},
    {"wolves", "wolf"}, {"halves", "half"}, {"selves", "self"},
    {"died", "die"}, {"dies", "die"}, {"dying", "die"}, {"lied", "lie"}, {"lies", "lie"},
    {"lying", "lie"}, {"tied", "tie"}, {"ties", "tie"}, {"used", "use"}, {"uses", "use"},
    {"using", "use"}, {"caused", "cause"}, {"causes", "cause"}, {"causing", "cause"},
    {"news", "news"}, {"series", "series"}, {"species", "species"}, {"movies", "movie"},
    {"cookies", "cookie"}, {"shoes", "shoe"}, {"toes", "toe"}, {"bias", "bias"}, {"alias", "alias"},
    {"atlas", "atlas"}, {"canvas", "canvas"}, {"christmas", "christmas"}, {"texas", "texas"},
    {"thanks", "thanks"}, {"always", "always"}, {"perhaps", "perhaps"}, {"sometimes", "sometimes"},
    {"morning", "morning"}, {"evening", "evening"}, {"nothing", "nothing"}, {"something", "something"},
    {"anything", "anything"}, {"everything", "everything"}, {"during", "during"},
    {"building", "building"}, {"king", "king"}, {"ring", "ring"}, {"spring", "spring"},
    {"string", "string"}, {"wing", "wing"}, {"ceiling", "ceiling"}, {"wedding", "wedding"},
    {"hundred", "hundred"}, {"sacred", "sacred"}, {"naked", "naked"}, {"wicked", "wicked"},
    {"hatred", "hatred"}, {"beloved", "beloved"}, {"blessed", "blessed"}, {"speed", "speed"},
    {"agreed", "agree"}, {"created", "create"}, {"creating", "create"},
    {"buses", "bus"}, {"gases", "gas"}, {"status", "status"}, {"bonus", "bonus"}, {"freed", "free"}, {"guaranteed", "guarantee"},
};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_vowel(s[i]) || (s[i] == 'y' && i > 0)) return true;
  return false;
}

bool ascii_lower_word(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

int vowel_groups(std::string_view s) {
  int groups = 0;
  bool in = false;
  for (char c : s) {
    const bool v = is_vowel(c) || c == 'y';
    if (v && !in) ++groups;
    in = v;
  }
  return groups;
}

// Repairs a stem left after removing -ing / -ed.
std::string restore_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (ends_with(stem, "bl") || ends_with(stem, "iz") || ends_with(stem, "v") || ends_with(stem, "c"))
    return stem + "e";
  if (n >= 4 && ends_with(stem, "at") && stem[n - 3] != 'a' && stem[n - 3] != 'e' && stem[n - 3] != 'o')
    return stem + "e";
  // Short consonant-vowel-consonant stems regain their silent e (mak -> make).
  if (n >= 3 && vowel_groups(stem) == 1 && !is_vowel(stem[n - 3]) && is_vowel(stem[n - 2]) &&
      !is_vowel(stem[n - 1]) && stem[n - 1] != 'w' && stem[n - 1] != 'x' && stem[n - 1] != 'y')
    return stem + "e";
  return stem;
}

}  // namespace

RuleLemmatizer::RuleLemmatizer() {
  for (const auto& [form, lemma] : kExceptions) exceptions_.emplace(form, lemma);
}

void RuleLemmatizer::add_exception(std::string form, std::string lemma) {
  require(!form.empty() && !lemma.empty(), "lemma exception entries must be non-empty");
  exceptions_[std::move(form)] = std::move(lemma);
}

void RuleLemmatizer::load_exceptions(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "cannot open lemma exceptions: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string form, lemma;
    if (!(ss >> form >> lemma)) fail(ErrorKind::Parse, "bad exception line: " + line);
    add_exception(form, lemma);
  }
}

std::string RuleLemmatizer::step(const std::string& w) const {
  if (auto it = exceptions_.find(w); it != exceptions_.end()) return it->second;
  if (!ascii_lower_word(w) || w.size() < 3) return w;
  const std::size_t n = w.size();

  if (n > 4 && ends_with(w, "ies")) return w.substr(0, n - 3) + "y";
  if (n > 4 && ends_with(w, "ied")) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "sses") || ends_with(w, "zzes")) return w.substr(0, n - 2);
  if (n > 4 && (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes")))
    return w.substr(0, n - 2);
  if (n > 4 && ends_with(w, "oes")) return w.substr(0, n - 2);
  if (n > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is"))
    return w.substr(0, n - 1);
  if (n >= 5 && ends_with(w, "ing")) {
    const std::string stem = w.substr(0, n - 3);
    if (has_vowel(stem)) return restore_stem(stem);
    return w;
  }
  if (n >= 4 && ends_with(w, "ed") && !ends_with(w, "eed")) {
    const std::string stem = w.substr(0, n - 2);
    if (stem.size() >= 2 && has_vowel(stem)) return restore_stem(stem);
  }
  return w;
}

std::string RuleLemmatizer::lemma(std::string_view word) const {
  std::string cur(word);
  for (int i = 0; i < 8; ++i) {
    std::string next = step(cur);
    if (next.empty() || next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace lexdiv::textprep
