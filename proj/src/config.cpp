#include "lexdiv/config.hpp"

#include <algorithm>
#include <functional>

#include "lexdiv/artifacts.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/format.hpp"
#include "lexdiv/rng.hpp"

namespace lexdiv::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

std::string quote(std::string_view v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool bare_ok(std::string_view v) {
  if (v == "true" || v == "false") return true;
  return !v.empty() && parse_number(v).has_value() && v != "nan";
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto f : split_fields(s, ',')) {
    f = trim(f);
    if (!f.empty()) out.emplace_back(f);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

template <class T>
T parse_int(const std::string& key, const std::string& v) {
  long long x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(ErrorKind::InvalidArgument, "config " + key + ": expected an integer, got '" + v + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (x < 0) fail(ErrorKind::InvalidArgument, "config " + key + ": must not be negative");
  }
  return static_cast<T>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(ErrorKind::InvalidArgument, "config " + key + ": expected an unsigned integer, got '" + v + "'");
  return x;
}

double parse_real(const std::string& key, const std::string& v) {
  const auto x = parse_number(v);
  if (!x || std::isnan(*x)) fail(ErrorKind::InvalidArgument, "config " + key + ": expected a number, got '" + v + "'");
  return *x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::InvalidArgument, "config " + key + ": expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(parse_int<int>(key, item));
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

#define LDV_STR(KEY, MEMBER) \
  Field{KEY, [](const PipelineConfig& c) { return c.MEMBER; }, [](PipelineConfig& c, const std::string& v) { c.MEMBER = v; }}
#define LDV_INT(KEY, MEMBER, TYPE)                                                   \
  Field{KEY, [](const PipelineConfig& c) { return std::to_string(c.MEMBER); },       \
        [](PipelineConfig& c, const std::string& v) { c.MEMBER = parse_int<TYPE>(KEY, v); }}
#define LDV_REAL(KEY, MEMBER)                                                        \
  Field{KEY, [](const PipelineConfig& c) { return format_number(c.MEMBER); },        \
        [](PipelineConfig& c, const std::string& v) { c.MEMBER = parse_real(KEY, v); }}
#define LDV_INTS(KEY, MEMBER)                                                        \
  Field{KEY, [](const PipelineConfig& c) { return join_ints(c.MEMBER); },            \
        [](PipelineConfig& c, const std::string& v) { c.MEMBER = parse_int_list(KEY, v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      LDV_STR("paths.workdir", workdir),
      LDV_STR("paths.registry", registry),
      Field{"paths.followers", [](const PipelineConfig& c) { return join(c.followers); },
            [](PipelineConfig& c, const std::string& v) { c.followers = split_list(v); }},
      LDV_STR("paths.profiles", profiles),
      LDV_STR("paths.tweets", tweets),
      LDV_STR("paths.lexicon", lexicon),
      LDV_STR("paths.emoji_lexicon", emoji_lexicon),
      LDV_STR("paths.lemma_exceptions", lemma_exceptions),
      LDV_STR("paths.ui_dir", ui_dir),
      Field{"window.start", [](const PipelineConfig& c) { return format_date(c.window.start); },
            [](PipelineConfig& c, const std::string& v) {
              const auto d = parse_date(v);
              if (!d) fail(ErrorKind::InvalidArgument, "config window.start: bad date '" + v + "'");
              c.window.start = *d;
            }},
      Field{"window.end", [](const PipelineConfig& c) { return format_date(c.window.end); },
            [](PipelineConfig& c, const std::string& v) {
              const auto d = parse_date(v);
              if (!d) fail(ErrorKind::InvalidArgument, "config window.end: bad date '" + v + "'");
              c.window.end = *d;
            }},
      LDV_INT("admission.min_tweets", admission.min_tweets, std::int64_t),
      LDV_INT("admission.min_follows", admission.min_follows, std::int64_t),
      LDV_INT("admission.min_followers", admission.min_followers, std::int64_t),
      LDV_REAL("admission.min_likes_ratio", admission.min_likes_ratio),
      LDV_INT("admission.tweet_cap", tweet_cap, std::size_t),
      LDV_INT("admission.tally_memory_users", tally_memory_users, std::size_t),
      LDV_INT("freq.min_either", freq.min_either, std::uint64_t),
      LDV_INT("freq.min_total", freq.min_total, std::uint64_t),
      LDV_INT("freq.min_users", freq.min_users, std::uint64_t),
      LDV_REAL("freq.min_user_token_ratio", freq.min_user_token_ratio),
      LDV_INT("embed.min_both", embed_profile.min_both, std::uint64_t),
      LDV_INT("embed.dim", embedding.dim, int),
      LDV_INT("embed.window", embedding.window, int),
      LDV_INT("embed.min_count", embedding.min_count, int),
      LDV_INT("embed.epochs", embedding.epochs, int),
      LDV_INT("embed.negative", embedding.negative_samples, int),
      LDV_INT("embed.minn", embedding.minn, int),
      LDV_INT("embed.maxn", embedding.maxn, int),
      LDV_REAL("embed.learning_rate", embedding.learning_rate),
      LDV_INT("embed.buckets", embedding.bucket_count, std::uint32_t),
      LDV_REAL("embed.subsample", embedding.subsample),
      LDV_INT("embed.negative_table", embedding.negative_table_size, std::size_t),
      LDV_INT("embed.workers", embedding.workers, int),
      Field{"embed.seed", [](const PipelineConfig& c) { return std::to_string(c.embedding.seed); },
            [](PipelineConfig& c, const std::string& v) { c.embedding.seed = parse_u64("embed.seed", v); }},
      Field{"embed.center", [](const PipelineConfig& c) { return std::string(c.center ? "true" : "false"); },
            [](PipelineConfig& c, const std::string& v) { c.center = parse_bool("embed.center", v); }},
      LDV_INTS("tune.dim", tune_dim),
      LDV_INTS("tune.window", tune_window),
      LDV_INTS("tune.epochs", tune_epochs),
      LDV_INTS("tune.min_count", tune_min_count),
      LDV_STR("sentiment.granularity", granularity),
      LDV_INT("sentiment.permutations", permutations, std::size_t),
      LDV_REAL("topics.eps", dbscan_eps),
      LDV_INT("topics.min_pts", dbscan_min_pts, std::size_t),
      LDV_INT("topics.keywords", keywords, std::size_t),
      LDV_INT("topics.map_max_docs", map_max_docs, std::size_t),
      LDV_INT("classify.bootstrap", bootstrap, std::size_t),
      LDV_REAL("classify.train_fraction", train_fraction),
      LDV_REAL("classify.ridge_scale", ridge_scale),
      LDV_STR("annotate.session", session),
      Field{"annotate.targets", [](const PipelineConfig& c) { return join(c.targets); },
            [](PipelineConfig& c, const std::string& v) { c.targets = split_list(v); }},
      LDV_INT("annotate.n_targets", n_targets, std::size_t),
      LDV_STR("llm.base_url", llm.base_url),
      LDV_STR("llm.model", llm.model),
      LDV_STR("llm.api_key_env", llm.api_key_env),
      LDV_STR("llm.prompt", llm.prompt_path),
      LDV_INT("llm.attempts", llm.attempts, int),
      LDV_REAL("llm.temperature", llm.temperature),
      LDV_INT("llm.timeout_seconds", llm.timeout_seconds, int),
      LDV_INT("llm.concurrency", llm.concurrency, std::size_t),
      Field{"seeds.master", [](const PipelineConfig& c) { return std::to_string(c.seed); },
            [](PipelineConfig& c, const std::string& v) { c.seed = parse_u64("seeds.master", v); }},
  };
  return table;
}

#undef LDV_STR
#undef LDV_INT
#undef LDV_REAL
#undef LDV_INTS

}  // namespace

bool is_secret_key(std::string_view key) {
  const std::string k = [&] {
    std::string s(key);
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }();
  if (k.size() >= 8 && k.compare(k.size() - 8, 8, "_key_env") == 0) return false;
  if (k.find("api_key") != std::string::npos || k.find("apikey") != std::string::npos) return true;
  const auto dot = k.rfind('.');
  const std::string last = dot == std::string::npos ? k : k.substr(dot + 1);
  // Matched as the trailing word so names like min_user_token_ratio pass.
  for (const std::string bad : {"secret", "password", "passwd", "token", "bearer", "credential", "credentials"}) {
    if (last == bad) return true;
    if (last.size() > bad.size() && last.compare(last.size() - bad.size(), bad.size(), bad) == 0 &&
        last[last.size() - bad.size() - 1] == '_')
      return true;
  }
  return false;
}

KeyValues parse_toml(std::string_view text) {
  KeyValues kv;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::Parse, where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) fail(ErrorKind::Parse, where + "bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::Parse, where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail(ErrorKind::Parse, where + "bad key '" + std::string(key) + "'");
    std::string_view raw = trim(line.substr(eq + 1));
    std::string value;
    if (!raw.empty() && raw.front() == '"') {
      std::size_t i = 1;
      bool closed = false;
      for (; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c == '\\' && i + 1 < raw.size()) {
          const char n = raw[++i];
          value.push_back(n == 'n' ? '\n' : n == 't' ? '\t' : n);
        } else if (c == '"') {
          closed = true;
          ++i;
          break;
        } else {
          value.push_back(c);
        }
      }
      if (!closed) fail(ErrorKind::Parse, where + "unterminated string");
      const auto rest = trim(raw.substr(i));
      if (!rest.empty() && rest.front() != '#') fail(ErrorKind::Parse, where + "trailing characters after string");
    } else {
      const auto hash = raw.find('#');
      value = std::string(trim(raw.substr(0, hash)));
      // Bare lists: [1, 2, 3]
      if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
        std::string inner = value.substr(1, value.size() - 2);
        inner.erase(std::remove(inner.begin(), inner.end(), '"'), inner.end());
        value.clear();
        for (const auto& item : split_list(inner)) value += (value.empty() ? "" : ",") + item;
      }
    }
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (is_secret_key(full))
      fail(ErrorKind::InvalidArgument, where + "credentials are not accepted in config files ('" + full +
                                           "'); set the variable named by llm.api_key_env instead");
    if (kv.count(full)) fail(ErrorKind::Parse, where + "duplicate key '" + full + "'");
    kv[full] = value;
  }
  return kv;
}

std::string emit_toml(const KeyValues& kv) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (const auto& [full, v] : kv) {
    const auto dot = full.find('.');
    if (dot == std::string::npos)
      sections[""].emplace_back(full, v);
    else
      sections[full.substr(0, dot)].emplace_back(full.substr(dot + 1), v);
  }
  std::string out;
  for (const auto& [name, entries] : sections) {
    if (!name.empty()) out += (out.empty() ? "" : "\n") + ("[" + name + "]\n");
    for (const auto& [k, v] : entries) out += k + " = " + (bare_ok(v) ? v : quote(v)) + "\n";
  }
  return out;
}

KeyValues load_file(const std::string& path) { return parse_toml(artifacts::read_file(path)); }

std::pair<std::string, std::string> parse_assignment(std::string_view arg) {
  const auto eq = arg.find('=');
  if (eq == std::string_view::npos) fail(ErrorKind::InvalidArgument, "expected key=value, got '" + std::string(arg) + "'");
  std::string key(trim(arg.substr(0, eq)));
  std::string value(trim(arg.substr(eq + 1)));
  if (!valid_key(key)) fail(ErrorKind::InvalidArgument, "bad key '" + key + "'");
  if (is_secret_key(key)) fail(ErrorKind::InvalidArgument, "credentials are only read from the environment");
  return {key, value};
}

PipelineConfig PipelineConfig::defaults() { return PipelineConfig{}; }

KeyValues PipelineConfig::to_kv() const {
  KeyValues kv;
  for (const auto& f : fields()) kv[f.key] = f.get(*this);
  return kv;
}

PipelineConfig PipelineConfig::from_kv(const KeyValues& kv) {
  PipelineConfig c;
  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index[f.key] = &f;
  for (const auto& [k, v] : kv) {
    auto it = index.find(k);
    if (it == index.end()) fail(ErrorKind::InvalidArgument, "unknown config key '" + k + "'");
    it->second->set(c, v);
  }
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  require(!workdir.empty(), "config paths.workdir is empty");
  require(is_valid_date(window.start) && is_valid_date(window.end), "config window: invalid date");
  require(window.start <= window.end, "config window: start after end");
  require(admission.min_tweets >= 0 && admission.min_follows >= 0 && admission.min_followers >= 0,
          "config admission: thresholds must be >= 0");
  require(admission.min_likes_ratio >= 0.0, "config admission.min_likes_ratio must be >= 0");
  require(tweet_cap >= 1, "config admission.tweet_cap must be >= 1");
  require(tally_memory_users >= 1, "config admission.tally_memory_users must be >= 1");
  require(freq.min_user_token_ratio >= 0.0 && freq.min_user_token_ratio <= 1.0,
          "config freq.min_user_token_ratio must be in [0, 1]");
  require(embed_profile.min_both >= 1, "config embed.min_both must be >= 1");
  embedding.validate();
  for (int d : tune_dim) require(d >= 2 && d <= 1000, "config tune.dim entries must be in 2..1000");
  for (int w : tune_window) require(w >= 1 && w <= 50, "config tune.window entries must be in 1..50");
  for (int e : tune_epochs) require(e >= 1 && e <= 100, "config tune.epochs entries must be in 1..100");
  for (int m : tune_min_count) require(m >= 1, "config tune.min_count entries must be >= 1");
  require(granularity == "daily" || granularity == "weekly", "config sentiment.granularity must be daily or weekly");
  require(permutations >= 1 && permutations <= 10'000'000, "config sentiment.permutations out of range");
  require(dbscan_eps >= 0.0, "config topics.eps must be >= 0");
  require(dbscan_min_pts >= 2, "config topics.min_pts must be >= 2");
  require(keywords >= 1, "config topics.keywords must be >= 1");
  require(map_max_docs >= 3, "config topics.map_max_docs must be >= 3");
  require(bootstrap >= 1 && bootstrap <= 100000, "config classify.bootstrap out of range");
  require(train_fraction > 0.0 && train_fraction < 1.0, "config classify.train_fraction must be in (0, 1)");
  require(ridge_scale > 0.0, "config classify.ridge_scale must be > 0");
  require(!session.empty(), "config annotate.session is empty");
  require(n_targets >= 1, "config annotate.n_targets must be >= 1");
  llm.validate();
}

std::uint64_t PipelineConfig::seed_for(std::string_view stage) const { return mix_seed(seed, fnv1a64(stage)); }

std::string PipelineConfig::hash() const { return artifacts::sha256_hex(emit_toml(to_kv())); }

PipelineConfig resolve(const std::optional<std::string>& file, const KeyValues& overrides) {
  KeyValues kv = PipelineConfig::defaults().to_kv();
  if (file) {
    for (const auto& [k, v] : load_file(*file)) kv[k] = v;
  }
  for (const auto& [k, v] : overrides) {
    if (is_secret_key(k)) fail(ErrorKind::InvalidArgument, "credentials are only read from the environment");
    kv[k] = v;
  }
  return PipelineConfig::from_kv(kv);
}

}  // namespace lexdiv::config
