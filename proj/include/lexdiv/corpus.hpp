#pragma once

// Tweet records and their line-delimited JSON form:
//   {"id","user","ts","side","text","likes","rts","lang"}
// Cleaned corpora add "raw" (the original text, kept for sentiment scoring)
// and "tokens" (lexemes after tokenization and lemmatization).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexdiv {

enum class Side { Left, Right, Unknown };

const char* to_string(Side side);
Side parse_side(std::string_view s);  // "left"/"l"/"right"/"r", else Unknown

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const Date&) const = default;
};

// Days since 1970-01-01 (proleptic Gregorian).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);
// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ...").
std::optional<Date> parse_date(std::string_view s);
std::string format_date(const Date& d);
bool is_valid_date(const Date& d);
// Monday of the ISO week containing d.
Date week_start(const Date& d);

struct DateRange {
  Date start;
  Date end;  // inclusive
  bool contains(const Date& d) const { return start <= d && d <= end; }
};

struct TweetRecord {
  std::string id;
  std::string user;
  std::string ts;
  Side side = Side::Unknown;
  std::string text;
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::string lang = "en";
  bool has_media = false;
  std::optional<std::string> raw;
  std::optional<std::vector<std::string>> tokens;
};

TweetRecord parse_record(std::string_view json_line);
std::string serialize_record(const TweetRecord& rec);

// Streams records from a JSONL file. Lines that fail to parse are reported
// through on_error (1-based line number, message) and skipped; without a
// handler they throw.
void for_each_record(const std::string& path,
                     const std::function<void(TweetRecord&&)>& fn,
                     const std::function<void(std::size_t, const std::string&)>& on_error = {});
std::vector<TweetRecord> read_corpus(const std::string& path);
void write_corpus(std::ostream& os, const std::vector<TweetRecord>& records);

}  // namespace lexdiv
