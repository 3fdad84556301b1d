#include "lexdiv/delineate.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "json.hpp"
#include "lexdiv/error.hpp"
#include "lexdiv/utf8.hpp"

namespace lexdiv::delineate {

namespace fs = std::filesystem;

const char* to_string(Category c) {
  switch (c) {
    case Category::Left: return "left";
    case Category::LeanLeft: return "lean_left";
    case Category::Center: return "center";
    case Category::LeanRight: return "lean_right";
    case Category::Right: return "right";
  }
  return "center";
}

std::optional<Category> parse_category(std::string_view s) {
  std::string key;
  for (char c : s) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc)) key.push_back(static_cast<char>(std::tolower(uc)));
  }
  if (key == "left") return Category::Left;
  if (key == "leanleft") return Category::LeanLeft;
  if (key == "center" || key == "centre") return Category::Center;
  if (key == "leanright") return Category::LeanRight;
  if (key == "right") return Category::Right;
  return std::nullopt;
}

OutletRegistry::OutletRegistry(std::vector<Outlet> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].account_id.empty()) fail(ErrorKind::InvalidArgument, "registry: empty account_id");
    if (!index_.emplace(entries_[i].account_id, i).second)
      fail(ErrorKind::InvalidArgument, "registry: duplicate account_id " + entries_[i].account_id);
  }
}

OutletRegistry OutletRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "cannot open registry: " + path);
  std::vector<Outlet> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("account_id", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) f.push_back(field);
    if (f.size() != 4)
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields");
    auto cat = parse_category(f[2]);
    if (!cat) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": unknown category '" + f[2] + "'");
    Outlet o{f[0], f[1], *cat, 0};
    try {
      o.follower_count = std::stoll(f[3]);
    } catch (...) {
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": bad follower_count");
    }
    if (o.follower_count < 0) fail(ErrorKind::Parse, path + ": negative follower_count");
    entries.push_back(std::move(o));
  }
  return OutletRegistry(std::move(entries));
}

std::optional<std::size_t> OutletRegistry::find(std::string_view account_id) const {
  auto it = index_.find(std::string(account_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void OutletRegistry::validate_poles() const {
  bool left = false, right = false;
  for (const auto& o : entries_) {
    left |= o.category == Category::Left;
    right |= o.category == Category::LeanRight || o.category == Category::Right;
  }
  if (!left || !right)
    fail(ErrorKind::InvalidArgument, "registry needs at least one left and one lean_right/right account");
}

const char* to_string(Group g) {
  switch (g) {
    case Group::Left: return "Left";
    case Group::Right: return "Right";
    case Group::Excluded: return "Excluded";
  }
  return "Excluded";
}

GroupAssignment assign_from_counts(std::string user_id, const CategoryCounts& c) {
  GroupAssignment a;
  a.user_id = std::move(user_id);
  a.left_count = c[Category::Left];
  a.right_pole_count = c[Category::LeanRight] + c[Category::Right];
  const std::uint32_t lean_left_center = c[Category::LeanLeft] + c[Category::Center];
  if (a.left_count >= 2 && a.right_pole_count == 0 && lean_left_center == 0) {
    a.group = Group::Left;
    a.other_count = 0;
  } else if (a.right_pole_count >= 2 && a.left_count == 0 && lean_left_center == 0) {
    a.group = Group::Right;
    a.other_count = 0;
  } else {
    a.group = Group::Excluded;
    // Count of follows outside the pole the user leans to.
    if (a.left_count >= a.right_pole_count)
      a.other_count = a.right_pole_count + lean_left_center;
    else
      a.other_count = a.left_count + lean_left_center;
  }
  return a;
}

CategoryCounts counts_for(const std::vector<std::uint32_t>& accounts, const OutletRegistry& registry) {
  CategoryCounts c;
  for (auto idx : accounts) ++c.by_category[static_cast<std::size_t>(registry.entries()[idx].category)];
  return c;
}

GroupAssignment assign_group(const std::set<std::string>& follows, const OutletRegistry& registry,
                             std::string user_id) {
  CategoryCounts c;
  for (const auto& acc : follows) {
    if (auto idx = registry.find(acc))
      ++c.by_category[static_cast<std::size_t>(registry.entries()[*idx].category)];
  }
  return assign_from_counts(std::move(user_id), c);
}

std::string format_assignment(const GroupAssignment& a) {
  return a.user_id + '\t' + to_string(a.group) + '\t' + std::to_string(a.left_count) + '\t' +
         std::to_string(a.right_pole_count) + '\t' + std::to_string(a.other_count);
}

std::vector<UserProfile> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "cannot open profiles: " + path);
  std::vector<UserProfile> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      UserProfile p;
      p.user_id = j.at("user").is_string() ? j.at("user").get<std::string>() : j.at("user").dump();
      p.location_us = j.value("location_us", false);
      auto d = parse_date(j.value("created_at", std::string()));
      if (!d) fail(ErrorKind::Parse, "invalid created_at");
      p.created_at = *d;
      p.tweet_count_window = j.value("tweet_count", std::int64_t{0});
      p.follows_count = j.value("follows", std::int64_t{0});
      p.followers_count = j.value("followers", std::int64_t{0});
      p.likes_received = j.value("likes", std::int64_t{0});
      if (p.tweet_count_window < 0 || p.follows_count < 0 || p.followers_count < 0 || p.likes_received < 0)
        fail(ErrorKind::Parse, "negative count");
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

AdmitDecision admit_user(const UserProfile& p, const DateRange& window, const AdmissionRules& rules) {
  require(window.start <= window.end, "admission window is inverted");
  AdmitDecision d;
  if (!p.location_us) d.failed_rules.push_back("location");
  if (!(p.created_at <= window.start)) d.failed_rules.push_back("account_age");
  if (p.tweet_count_window < rules.min_tweets) d.failed_rules.push_back("tweet_count");
  if (p.follows_count < rules.min_follows) d.failed_rules.push_back("follows");
  if (p.followers_count < rules.min_followers) d.failed_rules.push_back("followers");
  bool ratio_ok = false;
  if (p.tweet_count_window > 0) {
    const double ratio = static_cast<double>(p.likes_received) / static_cast<double>(p.tweet_count_window);
    ratio_ok = ratio > rules.min_likes_ratio;
  }
  if (!ratio_ok) d.failed_rules.push_back("likes_ratio");
  d.admitted = d.failed_rules.empty();
  return d;
}

bool tweet_id_less(std::string_view a, std::string_view b) {
  auto digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (digits(a) && digits(b) && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<TweetRecord> cap_tweets(std::vector<TweetRecord> tweets, std::size_t cap) {
  require(cap > 0, "cap must be positive");
  for (const auto& t : tweets)
    require(t.user == tweets.front().user, "cap_tweets: tweets from more than one user");
  std::vector<std::size_t> lengths(tweets.size());
  std::vector<std::size_t> order(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    lengths[i] = utf8::length(tweets[i].text);
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ea = tweets[a].likes + tweets[a].retweets;
    const auto eb = tweets[b].likes + tweets[b].retweets;
    if (ea != eb) return ea > eb;
    if (lengths[a] != lengths[b]) return lengths[a] > lengths[b];
    return tweet_id_less(tweets[a].id, tweets[b].id);
  });
  order.resize(std::min(cap, order.size()));
  std::vector<TweetRecord> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(std::move(tweets[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Streaming tally

bool TallyPartial::add_line(std::string_view line, const OutletRegistry& registry, TallySummary& summary) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty()) return true;
  ++summary.records;
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size() ||
      line.find('\t', tab + 1) != std::string_view::npos) {
    ++summary.malformed;
    return false;
  }
  const auto account = line.substr(0, tab);
  const auto user = line.substr(tab + 1);
  const auto idx = registry.find(account);
  if (!idx) {
    ++summary.unknown_account;
    return true;
  }
  add(std::string(user), static_cast<std::uint32_t>(*idx));
  return true;
}

void TallyPartial::add(const std::string& user, std::uint32_t account_index) {
  auto& v = follows_[user];
  auto it = std::lower_bound(v.begin(), v.end(), account_index);
  if (it == v.end() || *it != account_index) v.insert(it, account_index);
}

void TallyPartial::merge(const TallyPartial& other) {
  for (const auto& [user, accounts] : other.follows_) {
    auto& mine = follows_[user];
    std::vector<std::uint32_t> merged;
    merged.reserve(mine.size() + accounts.size());
    std::set_union(mine.begin(), mine.end(), accounts.begin(), accounts.end(), std::back_inserter(merged));
    mine = std::move(merged);
  }
}

namespace {

class RunFiles {
 public:
  explicit RunFiles(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) dir_ = fs::temp_directory_path().string();
  }
  RunFiles(const RunFiles&) = delete;
  RunFiles& operator=(const RunFiles&) = delete;
  ~RunFiles() {
    std::error_code ec;
    for (const auto& p : paths_) fs::remove(p, ec);
  }

  void spill(TallyPartial& partial) {
    if (partial.users() == 0) return;
    std::string path;
    {
      std::lock_guard lock(mu_);
      static std::atomic<unsigned> counter{0};
      path = (fs::path(dir_) / ("lexdiv-tally-" + std::to_string(::getpid()) + "-" +
                                std::to_string(counter++) + ".run")).string();
      paths_.push_back(path);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write tally run: " + path);
    for (const auto& [user, accounts] : partial.follows()) {
      out << user << '\t';
      for (std::size_t i = 0; i < accounts.size(); ++i) out << (i ? "," : "") << accounts[i];
      out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "short write on tally run: " + path);
    partial.clear();
  }

  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::string dir_;
  std::mutex mu_;
  std::vector<std::string> paths_;
};

struct RunCursor {
  std::ifstream in;
  std::string user;
  std::vector<std::uint32_t> accounts;

  bool advance() {
    std::string line;
    if (!std::getline(in, line)) return false;
    const auto tab = line.find('\t');
    user = line.substr(0, tab);
    accounts.clear();
    std::stringstream ss(line.substr(tab + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) accounts.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    return true;
  }
};

void tally_files(const std::vector<std::string>& files, const OutletRegistry& registry,
                 std::size_t budget, RunFiles& runs, TallyPartial& partial, TallySummary& summary) {
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::MissingInput, "cannot open follower listing: " + path);
    std::string line;
    while (std::getline(in, line)) {
      partial.add_line(line, registry, summary);
      if (partial.users() > budget) {
        runs.spill(partial);
        ++summary.spilled_runs;
      }
    }
  }
}

}  // namespace

TallySummary stream_tally_to(const std::vector<std::string>& files, const OutletRegistry& registry,
                             const TallySink& sink, const TallyOptions& options) {
  require(options.memory_budget_users > 0, "memory budget must be positive");
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, files.size()));
  const std::size_t budget = std::max<std::size_t>(1, options.memory_budget_users / workers);

  RunFiles runs(options.temp_dir);
  std::vector<TallyPartial> partials(workers);
  std::vector<TallySummary> summaries(workers);

  if (workers == 1) {
    tally_files(files, registry, budget, runs, partials[0], summaries[0]);
  } else {
    std::vector<std::vector<std::string>> shards(workers);
    for (std::size_t i = 0; i < files.size(); ++i) shards[i % workers].push_back(files[i]);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          tally_files(shards[w], registry, budget, runs, partials[w], summaries[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  TallySummary total;
  for (const auto& s : summaries) {
    total.records += s.records;
    total.malformed += s.malformed;
    total.unknown_account += s.unknown_account;
    total.spilled_runs += s.spilled_runs;
  }

  if (runs.paths().empty()) {
    for (std::size_t w = 1; w < workers; ++w) partials[0].merge(partials[w]);
    for (const auto& [user, accounts] : partials[0].follows()) {
      sink(user, counts_for(accounts, registry));
      ++total.users;
    }
    return total;
  }

  for (auto& p : partials) runs.spill(p);
  total.spilled_runs = runs.paths().size();
  std::vector<RunCursor> cursors(runs.paths().size());
  using Entry = std::pair<std::string, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t i = 0; i < cursors.size(); ++i) {
    cursors[i].in.open(runs.paths()[i]);
    if (!cursors[i].in) fail(ErrorKind::Io, "cannot reopen tally run");
    if (cursors[i].advance()) heap.emplace(cursors[i].user, i);
  }
  while (!heap.empty()) {
    const std::string user = heap.top().first;
    std::vector<std::uint32_t> accounts;
    while (!heap.empty() && heap.top().first == user) {
      const std::size_t i = heap.top().second;
      heap.pop();
      std::vector<std::uint32_t> merged;
      std::set_union(accounts.begin(), accounts.end(), cursors[i].accounts.begin(),
                     cursors[i].accounts.end(), std::back_inserter(merged));
      accounts = std::move(merged);
      if (cursors[i].advance()) heap.emplace(cursors[i].user, i);
    }
    sink(user, counts_for(accounts, registry));
    ++total.users;
  }
  return total;
}

TallyMap stream_tally(const std::vector<std::string>& files, const OutletRegistry& registry,
                      const TallyOptions& options, TallySummary* summary) {
  TallyMap out;
  auto s = stream_tally_to(
      files, registry, [&](const std::string& user, const CategoryCounts& c) { out.emplace_hint(out.end(), user, c); },
      options);
  if (summary) *summary = s;
  return out;
}

}  // namespace lexdiv::delineate
