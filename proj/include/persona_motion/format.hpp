#pragma once

#include <filesystem>
#include <string>

namespace persona {

/// Shortest-safe decimal: 17 significant digits, locale independent.
std::string format_double(double v);

/// Fixed-point with the given number of decimals (SVG coordinates).
std::string format_fixed(double v, int decimals);

/// Writes the whole file or throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace persona
