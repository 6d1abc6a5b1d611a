#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace regwatch {

// Calendar date, ISO-8601 rendering. Validity includes month lengths and
// leap years; nothing fancier is needed for publication/effective dates.
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  // Strict "YYYY-MM-DD".
  static std::optional<Date> parse_iso(std::string_view text);

  // Accepts the shipped date-pattern shapes: "January 2, 2019",
  // "2019-01-02", "1/2/2019" (month first).
  static std::optional<Date> parse_surface(std::string_view text);

  bool valid() const;
  std::string to_string() const;

  auto operator<=>(const Date&) const = default;
};

}  // namespace regwatch
