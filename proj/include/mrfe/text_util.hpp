#pragma once

#include "mrfe/precision.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix);

} // namespace mrfe
