#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pxa {

/// Whole-file read in binary mode. Throws FormatError when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace pxa
