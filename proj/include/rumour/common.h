#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rumour {

// Root of every error the toolkit raises. Subclasses name the failing
// contract; callers that only care about "something went wrong in stage X"
// catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input (missing file, inconsistent flags). Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Calendar date in UTC.
struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  // Accepts "YYYY-MM-DD", optionally followed by a time part ("T..." or " ...").
  static Date parse(std::string_view text);
  // Twitter v1.1 "created_at", e.g. "Wed Jan 07 11:06:08 +0000 2015".
  static Date parse_twitter(std::string_view text);
  static bool valid(int year, unsigned month, unsigned day);

  std::string iso() const;
  friend auto operator<=>(const Date&, const Date&) = default;
};

enum class Event {
  kCharlieHebdo,
  kSydneySiege,
  kFerguson,
  kOttawaShooting,
  kGermanwingsCrash,
};

inline constexpr std::array<Event, 5> kAllEvents = {
    Event::kCharlieHebdo, Event::kSydneySiege, Event::kFerguson,
    Event::kOttawaShooting, Event::kGermanwingsCrash};

std::string_view event_name(Event e);
std::string_view event_display_name(Event e);
std::string_view event_abbrev(Event e);
// Accepts canonical names ("charliehebdo") and PHEME directory prefixes
// ("germanwings-crash-all-rnr-threads").
std::optional<Event> parse_event(std::string_view text);

// Declaration order is the fixed tie-break order used by majority voting.
enum class Label { kFalse, kTrue, kUnverified };

inline constexpr std::array<Label, 3> kAllLabels = {Label::kFalse, Label::kTrue,
                                                    Label::kUnverified};

std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view text);

// ASCII helpers shared by the text modules. Bytes >= 0x80 are treated as
// word characters so UTF-8 letters stay attached to their words.
bool is_word_byte(char c);
bool is_alpha_ascii(char c);
bool is_digit_ascii(char c);
std::string to_lower(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// 64-bit FNV-1a, used for config fingerprints embedded in output files.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace rumour
