#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace onto {

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);

// Write-then-rename so interrupted runs never leave truncated artifacts.
void atomic_write(const std::string& path, std::string_view content);

void ensure_dir(const std::string& path);
bool file_exists(const std::string& path);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view s);
std::string lower(std::string_view s);

// Throwing parsers carrying file:line context for loader diagnostics.
long long parse_int(std::string_view s, const std::string& context);
double parse_double(std::string_view s, const std::string& context);

// Shortest-round-trip double formatting (exact re-parse).
std::string fmt_double(double v);
std::string fmt_fixed(double v, int digits);

uint64_t file_fingerprint(const std::string& path);
std::string to_hex(uint64_t v);

}  // namespace onto
