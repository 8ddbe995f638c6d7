#pragma once

#include <filesystem>
#include <string>

namespace piqa {

std::string read_text_file(const std::string& path);

// Writes via a temp file in the same directory, then renames into place.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace piqa
