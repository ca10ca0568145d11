#pragma once

#include <string>

#include "fuzzloc/errors.hpp"

namespace fuzzloc::io {

std::string read_file(const std::string& path);

// Writes to <path>.tmp then renames over the target.
void write_file_atomic(const std::string& path, const std::string& content);

// Resolves `relative` against the directory containing `anchor_file`.
std::string sibling_path(const std::string& anchor_file,
                         const std::string& relative);

}  // namespace fuzzloc::io
