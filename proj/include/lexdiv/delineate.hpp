#pragma once

// Follower-based group delineation: which users count as Left or Right
// given the news outlets they follow, plus activity admission and per-user
// tweet caps.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexdiv/corpus.hpp"

namespace lexdiv::delineate {

enum class Category { Left = 0, LeanLeft, Center, LeanRight, Right };
inline constexpr std::size_t kCategoryCount = 5;

const char* to_string(Category c);
// Case-insensitive; accepts "lean left", "lean_left", "lean-left", "leanleft".
std::optional<Category> parse_category(std::string_view s);

struct Outlet {
  std::string account_id;
  std::string display_name;
  Category category = Category::Center;
  std::int64_t follower_count = 0;
};

class OutletRegistry {
 public:
  OutletRegistry() = default;
  explicit OutletRegistry(std::vector<Outlet> entries);

  // TSV: account_id, display_name, category, follower_count. A first line
  // starting with "account_id" is treated as a header.
  static OutletRegistry load(const std::string& path);

  const std::vector<Outlet>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::optional<std::size_t> find(std::string_view account_id) const;

  // Throws unless both the left pole and the right pole (lean right or right)
  // have at least one account.
  void validate_poles() const;

 private:
  std::vector<Outlet> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Group { Left, Right, Excluded };
const char* to_string(Group g);

struct CategoryCounts {
  std::array<std::uint32_t, kCategoryCount> by_category{};

  std::uint32_t operator[](Category c) const { return by_category[static_cast<std::size_t>(c)]; }
  bool operator==(const CategoryCounts&) const = default;
};

struct GroupAssignment {
  std::string user_id;
  Group group = Group::Excluded;
  std::uint32_t left_count = 0;
  std::uint32_t right_pole_count = 0;
  std::uint32_t other_count = 0;
};

GroupAssignment assign_from_counts(std::string user_id, const CategoryCounts& counts);
GroupAssignment assign_group(const std::set<std::string>& follows, const OutletRegistry& registry,
                             std::string user_id = {});
std::string format_assignment(const GroupAssignment& a);  // one TSV line, no newline

struct UserProfile {
  std::string user_id;
  bool location_us = false;
  Date created_at;
  std::int64_t tweet_count_window = 0;
  std::int64_t follows_count = 0;
  std::int64_t followers_count = 0;
  std::int64_t likes_received = 0;
};

// Reads {"user","location_us","created_at","tweet_count","follows","followers","likes"} lines.
std::vector<UserProfile> load_profiles(const std::string& path);

struct AdmissionRules {
  std::int64_t min_tweets = 10;
  std::int64_t min_follows = 10;
  std::int64_t min_followers = 5;
  double min_likes_ratio = 0.03;  // strict: ratio must exceed this
};

struct AdmitDecision {
  bool admitted = false;
  std::vector<std::string> failed_rules;
};

AdmitDecision admit_user(const UserProfile& profile, const DateRange& window,
                         const AdmissionRules& rules = {});

// Keeps the `cap` highest-engagement tweets (likes + retweets), preferring
// longer text and then smaller tweet id on ties. All tweets must share one user.
std::vector<TweetRecord> cap_tweets(std::vector<TweetRecord> tweets, std::size_t cap = 700);
// Orders tweet ids numerically when both are digit strings.
bool tweet_id_less(std::string_view a, std::string_view b);

struct TallySummary {
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
  std::uint64_t unknown_account = 0;
  std::uint64_t users = 0;
  std::uint64_t spilled_runs = 0;
};

struct TallyOptions {
  // Distinct users held in memory before a sorted run is spilled to disk.
  std::size_t memory_budget_users = 1u << 22;
  std::string temp_dir;  // empty: system temp directory
  std::size_t workers = 1;
};

// Per-user set of followed registry accounts. Merging is set union, so
// partial tallies combine in any order.
class TallyPartial {
 public:
  // Returns false for a malformed line.
  bool add_line(std::string_view line, const OutletRegistry& registry, TallySummary& summary);
  void add(const std::string& user, std::uint32_t account_index);
  void merge(const TallyPartial& other);

  std::size_t users() const { return follows_.size(); }
  const std::map<std::string, std::vector<std::uint32_t>>& follows() const { return follows_; }
  void clear() { follows_.clear(); }

 private:
  std::map<std::string, std::vector<std::uint32_t>> follows_;  // sorted, unique
};

using TallyMap = std::map<std::string, CategoryCounts>;
using TallySink = std::function<void(const std::string& user, const CategoryCounts& counts)>;

// Streams follower listings (account_id TAB follower_user_id) and emits one
// callback per user in ascending user order. Falls back to sorted runs on
// disk plus a k-way merge when distinct users exceed the memory budget.
TallySummary stream_tally_to(const std::vector<std::string>& files, const OutletRegistry& registry,
                             const TallySink& sink, const TallyOptions& options = {});
TallyMap stream_tally(const std::vector<std::string>& files, const OutletRegistry& registry,
                      const TallyOptions& options = {}, TallySummary* summary = nullptr);

CategoryCounts counts_for(const std::vector<std::uint32_t>& accounts, const OutletRegistry& registry);

}  // namespace lexdiv::delineate
