#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace classmind::fsutil {

// Writes to "<path>.tmp-<pid>-<n>", fsyncs, then renames over `path`.
// Readers observe either the old or the new content, never a prefix.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

// Removes leftover temp files from interrupted writes in `dir`.
void remove_stale_temps(const std::filesystem::path& dir);

bool is_temp_name(const std::string& filename);

}  // namespace classmind::fsutil
