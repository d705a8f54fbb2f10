#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedsim {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

std::optional<long long> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);
/// Values joined by `sep`, each via format_double.
std::string join_doubles(std::span<const double> values, char sep);

} // namespace fedsim
