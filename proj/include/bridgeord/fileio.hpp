#pragma once

#include <string>
#include <string_view>

namespace bridgeord {

/// Whole-file read; throws IoError if the file cannot be opened.
std::string read_file(const std::string& path);
/// Writes `content` to `path + ".tmp"` and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace bridgeord
