#include "lexdiv/corpus.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "lexdiv/error.hpp"

namespace lexdiv {

using ordered_json = nlohmann::ordered_json;

const char* to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Unknown: return "unknown";
  }
  return "unknown";
}

Side parse_side(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "left" || lower == "l") return Side::Left;
  if (lower == "right" || lower == "r") return Side::Right;
  return Side::Unknown;
}

std::int64_t days_from_civil(const Date& d) {
  std::int64_t y = d.year;
  const unsigned m = static_cast<unsigned>(d.month);
  const unsigned dd = static_cast<unsigned>(d.day);
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool is_valid_date(const Date& d) {
  if (d.month < 1 || d.month > 12 || d.day < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int limit = kDays[d.month - 1];
  const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  if (d.month == 2 && leap) limit = 29;
  return d.day <= limit;
}

std::optional<Date> parse_date(std::string_view s) {
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return std::nullopt;
  Date d;
  auto num = [&](std::size_t pos, std::size_t len, int& out) {
    const char* b = s.data() + pos;
    auto [p, ec] = std::from_chars(b, b + len, out);
    return ec == std::errc() && p == b + len;
  };
  if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
  if (!is_valid_date(d)) return std::nullopt;
  return d;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

Date week_start(const Date& d) {
  const std::int64_t days = days_from_civil(d);
  // 1970-01-01 was a Thursday; weekday index with Monday = 0.
  const std::int64_t weekday = ((days % 7) + 7 + 3) % 7;
  return civil_from_days(days - weekday);
}

namespace {

std::string as_string(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_null()) return {};
  return v.dump();
}

std::int64_t as_count(const ordered_json& v, const char* field) {
  if (v.is_null()) return 0;
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(ErrorKind::Parse, std::string("field '") + field + "' must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < 0) fail(ErrorKind::Parse, std::string("field '") + field + "' must be non-negative");
  return n;
}

}  // namespace

TweetRecord parse_record(std::string_view line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::Parse, "record is not a JSON object");
  TweetRecord r;
  if (!j.contains("id")) fail(ErrorKind::Parse, "record lacks 'id'");
  r.id = as_string(j["id"]);
  r.user = as_string(j.value("user", ordered_json()));
  r.ts = as_string(j.value("ts", ordered_json()));
  r.side = parse_side(as_string(j.value("side", ordered_json())));
  r.text = as_string(j.value("text", ordered_json()));
  r.likes = as_count(j.value("likes", ordered_json()), "likes");
  r.retweets = as_count(j.value("rts", ordered_json()), "rts");
  if (j.contains("lang")) r.lang = as_string(j["lang"]);
  if (j.contains("media")) r.has_media = j["media"].is_boolean() && j["media"].get<bool>();
  if (j.contains("raw")) r.raw = as_string(j["raw"]);
  if (j.contains("tokens")) {
    if (!j["tokens"].is_array()) fail(ErrorKind::Parse, "'tokens' must be an array");
    std::vector<std::string> toks;
    for (const auto& t : j["tokens"]) toks.push_back(as_string(t));
    r.tokens = std::move(toks);
  }
  return r;
}

std::string serialize_record(const TweetRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["user"] = r.user;
  j["ts"] = r.ts;
  j["side"] = to_string(r.side);
  j["text"] = r.text;
  j["likes"] = r.likes;
  j["rts"] = r.retweets;
  j["lang"] = r.lang;
  if (r.has_media) j["media"] = true;
  if (r.raw) j["raw"] = *r.raw;
  if (r.tokens) j["tokens"] = *r.tokens;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void for_each_record(const std::string& path, const std::function<void(TweetRecord&&)>& fn,
                     const std::function<void(std::size_t, const std::string&)>& on_error) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MissingInput, "cannot open corpus: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TweetRecord rec;
    try {
      rec = parse_record(line);
    } catch (const Error& e) {
      if (!on_error) fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": " + e.what());
      on_error(lineno, e.what());
      continue;
    }
    fn(std::move(rec));
  }
}

std::vector<TweetRecord> read_corpus(const std::string& path) {
  std::vector<TweetRecord> out;
  for_each_record(path, [&](TweetRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

void write_corpus(std::ostream& os, const std::vector<TweetRecord>& records) {
  for (const auto& r : records) os << serialize_record(r) << '\n';
}

}  // namespace lexdiv
