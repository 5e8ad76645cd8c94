#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace fxcast {

using Date = std::chrono::year_month_day;

/// Strict ISO-8601 `YYYY-MM-DD`; returns nullopt on any deviation or an
/// invalid calendar date.
std::optional<Date> parse_date(std::string_view text);

std::string format_date(const Date& date);

Date add_days(const Date& date, int days);

}  // namespace fxcast
