#pragma once

// Synthetic corpora with planted effects, written as ordinary pipeline
// inputs (registry, follower listings, profiles, raw tweets) plus a
// ground-truth table.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lexdiv/corpus.hpp"
#include "lexdiv/delineate.hpp"
#include "lexdiv/sentiment.hpp"

namespace lexdiv::fixture {

struct PlantedHomonym {
  std::string word;
  std::size_t left_topic = 0;
  std::size_t right_topic = 1;
  double rate = 0.3;  // chance per tweet of the matching topic
};

struct FrequencySkew {
  std::string word;
  double factor = 2.0;      // right rate / left rate
  double base_rate = 0.01;  // chance per left tweet
};

struct FixtureSpec {
  std::uint64_t seed = 7;
  std::size_t users_per_side = 200;
  std::size_t tweets_per_side = 50000;
  std::size_t excluded_users = 20;  // mixed outlet diets, never admitted to a side
  std::size_t topics = 10;
  std::size_t topic_words = 60;
  std::size_t general_words = 300;
  std::size_t min_words = 11;
  std::size_t max_words = 16;
  std::vector<PlantedHomonym> homonyms;
  std::vector<std::string> controls;  // same usage on both sides
  double control_rate = 0.3;
  std::vector<FrequencySkew> frequency_skews;
  double sentiment_shift = 0.0;  // right minus left share of positive words, in [-1, 1]
  double topic_skew = 0.0;       // [0, 1): left leans to the first half of topics
  DateRange window{{2021, 2, 1}, {2021, 9, 7}};

  // Throws InvalidArgument on contradictory settings.
  void validate() const;
  // One homonym, 20 controls, 50k tweets per side.
  static FixtureSpec standard(std::uint64_t seed);
};

struct TruthRow {
  std::string item;
  std::string kind;  // homonym, control, frequency_skew, sentiment_shift, topic_skew
  std::string detail;
};

struct Fixture {
  std::vector<delineate::Outlet> outlets;
  std::vector<std::pair<std::string, std::string>> follower_records;  // (account, user)
  std::vector<delineate::UserProfile> profiles;
  std::vector<TweetRecord> tweets;  // side left Unknown, as collected
  std::map<std::string, Side> true_side;
  std::vector<TruthRow> truth;  // empty when nothing is planted
};

Fixture generate(const FixtureSpec& spec);

struct FixtureFiles {
  std::filesystem::path registry;
  std::filesystem::path followers;
  std::filesystem::path profiles;
  std::filesystem::path tweets;
  std::filesystem::path truth;
};

FixtureFiles write_fixture(const Fixture& f, const std::filesystem::path& dir);
FixtureFiles make_fixture(const FixtureSpec& spec, const std::filesystem::path& dir);
std::vector<TruthRow> read_truth(const std::filesystem::path& path);

// Per-user mean sentiment for side-effect checks: user means drawn around
// base (left) and base + shift (right) with the given spread.
std::vector<sentiment::UserMean> user_means(std::size_t users_per_side, double base, double shift, double sigma,
                                            std::uint64_t seed);

}  // namespace lexdiv::fixture
