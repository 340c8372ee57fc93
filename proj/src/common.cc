#include "rumour/common.h"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace rumour {

namespace {

int parse_int(std::string_view s, std::string_view what, std::string_view full) {
  if (s.empty()) throw ValidationError("bad " + std::string(what) + " in date '" + std::string(full) + "'");
  int v = 0;
  for (char c : s) {
    if (!is_digit_ascii(c))
      throw ValidationError("bad " + std::string(what) + " in date '" + std::string(full) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

constexpr std::array<std::string_view, 12> kMonths = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

}  // namespace

bool Date::valid(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  return ymd.ok();
}

Date Date::parse(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-')
    throw ValidationError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ')
    throw ValidationError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  Date d;
  d.year = parse_int(text.substr(0, 4), "year", text);
  d.month = static_cast<unsigned>(parse_int(text.substr(5, 2), "month", text));
  d.day = static_cast<unsigned>(parse_int(text.substr(8, 2), "day", text));
  if (!valid(d.year, d.month, d.day))
    throw ValidationError("invalid calendar date '" + std::string(text) + "'");
  return d;
}

Date Date::parse_twitter(std::string_view text) {
  // "Wed Jan 07 11:06:08 +0000 2015"
  auto fields = split_ws(text);
  if (fields.size() != 6) throw ValidationError("bad created_at '" + std::string(text) + "'");
  unsigned month = 0;
  for (unsigned i = 0; i < kMonths.size(); ++i)
    if (fields[1] == kMonths[i]) month = i + 1;
  if (month == 0) throw ValidationError("bad month in created_at '" + std::string(text) + "'");
  int day = parse_int(fields[2], "day", text);
  int year = parse_int(fields[5], "year", text);
  const std::string& clock = fields[3];
  if (clock.size() != 8 || clock[2] != ':' || clock[5] != ':')
    throw ValidationError("bad time in created_at '" + std::string(text) + "'");
  int hh = parse_int(std::string_view(clock).substr(0, 2), "hour", text);
  int mm = parse_int(std::string_view(clock).substr(3, 2), "minute", text);
  const std::string& zone = fields[4];
  if (zone.size() != 5 || (zone[0] != '+' && zone[0] != '-'))
    throw ValidationError("bad offset in created_at '" + std::string(text) + "'");
  int off = parse_int(std::string_view(zone).substr(1, 2), "offset", text) * 60 +
            parse_int(std::string_view(zone).substr(3, 2), "offset", text);
  if (zone[0] == '-') off = -off;
  if (!valid(year, month, static_cast<unsigned>(day)))
    throw ValidationError("invalid calendar date in created_at '" + std::string(text) + "'");

  using namespace std::chrono;
  sys_days days{year_month_day{std::chrono::year{year}, std::chrono::month{month},
                               std::chrono::day{static_cast<unsigned>(day)}}};
  auto local = sys_time<minutes>{days} + hours{hh} + minutes{mm};
  auto utc = local - minutes{off};
  year_month_day ymd{floor<std::chrono::days>(utc)};
  return Date{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
              static_cast<unsigned>(ymd.day())};
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
  return buf;
}

std::string_view event_name(Event e) {
  switch (e) {
    case Event::kCharlieHebdo: return "charliehebdo";
    case Event::kSydneySiege: return "sydneysiege";
    case Event::kFerguson: return "ferguson";
    case Event::kOttawaShooting: return "ottawashooting";
    case Event::kGermanwingsCrash: return "germanwings-crash";
  }
  return "?";
}

std::string_view event_display_name(Event e) {
  switch (e) {
    case Event::kCharlieHebdo: return "Charlie Hebdo";
    case Event::kSydneySiege: return "Sydney Siege";
    case Event::kFerguson: return "Ferguson";
    case Event::kOttawaShooting: return "Ottawa Shooting";
    case Event::kGermanwingsCrash: return "Germanwings Crash";
  }
  return "?";
}

std::string_view event_abbrev(Event e) {
  switch (e) {
    case Event::kCharlieHebdo: return "Ch";
    case Event::kSydneySiege: return "Sy";
    case Event::kFerguson: return "Fe";
    case Event::kOttawaShooting: return "Ot";
    case Event::kGermanwingsCrash: return "Ge";
  }
  return "?";
}

std::optional<Event> parse_event(std::string_view text) {
  std::string t = to_lower(text);
  for (Event e : kAllEvents) {
    std::string_view name = event_name(e);
    if (t == name || t.starts_with(std::string(name) + "-all")) return e;
  }
  if (t == "germanwings" || t == "germanwingscrash") return Event::kGermanwingsCrash;
  return std::nullopt;
}

std::string_view label_name(Label l) {
  switch (l) {
    case Label::kFalse: return "false";
    case Label::kTrue: return "true";
    case Label::kUnverified: return "unverified";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string t = to_lower(text);
  for (Label l : kAllLabels)
    if (t == label_name(l)) return l;
  if (t == "unv") return Label::kUnverified;
  return std::nullopt;
}

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || is_alpha_ascii(c) || is_digit_ascii(c) || c == '_';
}

bool is_alpha_ascii(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_digit_ascii(char c) { return c >= '0' && c <= '9'; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace rumour
