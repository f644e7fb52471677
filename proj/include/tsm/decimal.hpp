#pragma once

// Exact arithmetic on decimal literals, used for step times and step counts.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace tsm::decimal {

// Throws ParseError unless `text` is a signed decimal literal.
void require_literal(std::string_view text, std::string_view what);

bool is_literal(std::string_view text);

// n * value, exact, in plain positional notation without trailing zeros
// ("0.01" * 150 -> "1.5", "0.01" * 100 -> "1").
std::string times(std::string_view value, std::size_t n);

// numerator / denominator when it is a nonnegative integer, else nullopt.
std::optional<std::size_t> exact_quotient(std::string_view numerator, std::string_view denominator);

// Double approximation (truncated), for display and plotting.
double to_double(std::string_view value);

} // namespace tsm::decimal
