#pragma once
// Small shared helpers: string splitting, file io, RFC 3986 percent
// encoding, id/label validators and a stable 64-bit content hash.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mirlod::util {

std::vector<std::string_view> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Reads a whole file; throws mirlod::Error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Splits file content into lines on '\n'. A trailing newline does not
// produce an empty final line.
std::vector<std::string_view> split_lines(std::string_view content);

std::optional<long long> parse_int(std::string_view text);

// RFC 3986: unreserved characters pass through, everything else becomes
// %XX with uppercase hex digits.
std::string percent_encode(std::string_view value);
std::optional<std::string> percent_decode(std::string_view value);

// FNV-1a, used for build content hashes.
std::uint64_t fnv1a(std::string_view data, std::uint64_t state = 14695981039346656037ull);
std::string hex64(std::uint64_t value);

bool is_hairpin_id(std::string_view id);     // MI followed by 7 digits
bool is_mature_id(std::string_view id);      // MIMAT followed by 7 digits
bool is_version_label(std::string_view s);   // [0-9]+(\.[0-9]+)?
bool is_sequence(std::string_view s);        // non-empty over {A,C,G,U,N}
bool is_token(std::string_view s);           // non-empty, no whitespace

}  // namespace mirlod::util
