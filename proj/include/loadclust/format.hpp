#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace loadclust {

/// Shortest decimal text that parses back to exactly `value`; infinities are
/// written as `inf` / `-inf`.
std::string format_double(double value);

/// Inverse of format_double. Throws ValueError on malformed text.
double parse_double(std::string_view text);

/// Writes `contents` to a sibling temp file then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace loadclust
