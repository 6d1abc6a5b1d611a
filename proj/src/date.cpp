#include "regwatch/date.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace regwatch {

namespace {

const std::array<std::string_view, 12> kMonths = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};

bool is_leap(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
  static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<int> month_by_name(std::string_view name) {
  std::string n = lower(name);
  for (size_t i = 0; i < kMonths.size(); ++i) {
    if (n == kMonths[i]) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

bool Date::valid() const {
  if (year < 1 || year > 9999) return false;
  if (month < 1 || month > 12) return false;
  if (day < 1 || day > days_in_month(year, month)) return false;
  return true;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<Date> Date::parse_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  std::string_view y = text.substr(0, 4);
  std::string_view m = text.substr(5, 2);
  std::string_view d = text.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  Date out{to_int(y), to_int(m), to_int(d)};
  if (!out.valid()) return std::nullopt;
  return out;
}

std::optional<Date> Date::parse_surface(std::string_view text) {
  if (auto iso = parse_iso(text)) return iso;

  // "M/D/YYYY"
  {
    size_t s1 = text.find('/');
    if (s1 != std::string_view::npos) {
      size_t s2 = text.find('/', s1 + 1);
      if (s2 == std::string_view::npos) return std::nullopt;
      std::string_view m = text.substr(0, s1);
      std::string_view d = text.substr(s1 + 1, s2 - s1 - 1);
      std::string_view y = text.substr(s2 + 1);
      if (!all_digits(m) || !all_digits(d) || !all_digits(y) || y.size() != 4) {
        return std::nullopt;
      }
      Date out{to_int(y), to_int(m), to_int(d)};
      if (!out.valid()) return std::nullopt;
      return out;
    }
  }

  // "Month D, YYYY" — tolerate the comma being absent.
  {
    size_t sp = text.find(' ');
    if (sp == std::string_view::npos) return std::nullopt;
    auto month = month_by_name(text.substr(0, sp));
    if (!month) return std::nullopt;
    size_t i = sp + 1;
    size_t day_start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == day_start) return std::nullopt;
    int day = to_int(text.substr(day_start, i - day_start));
    if (i < text.size() && text[i] == ',') ++i;
    while (i < text.size() && text[i] == ' ') ++i;
    std::string_view y = text.substr(i);
    if (!all_digits(y) || y.size() != 4) return std::nullopt;
    Date out{to_int(y), *month, day};
    if (!out.valid()) return std::nullopt;
    return out;
  }
}

}  // namespace regwatch
