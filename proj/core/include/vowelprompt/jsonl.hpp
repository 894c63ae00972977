#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

namespace vowelprompt {

/// Calls `fn(value, line_number)` for each non-blank line. Throws IoError if
/// the file cannot be opened and ValidationError ("<file>:<line>: ...") for
/// malformed JSON or anything `fn` rejects with a ValidationError.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

/// Writes `text` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a of a byte string, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace vowelprompt
