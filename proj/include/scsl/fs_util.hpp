#pragma once

#include <filesystem>
#include <string>

namespace scsl {

// Writes to a sibling temp file then renames, so readers never observe a
// partially written file.
void write_text_atomic(const std::filesystem::path& file, const std::string& content);

std::string read_text(const std::filesystem::path& file);

}  // namespace scsl
