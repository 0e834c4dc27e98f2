// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rlpga {

// Shortest round-trip decimal, locale independent.
std::string format_double(double v);
// Locale-independent strict parse; throws ConfigError mentioning `what`.
double parse_double(std::string_view s, std::string_view what);
long parse_long(std::string_view s, std::string_view what);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace rlpga
