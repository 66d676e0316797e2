#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace evovox {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

// Canonical serialization used everywhere (keys sorted, round-trip numbers).
std::string canonical_json(const nlohmann::json& j, int indent = -1);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

// Minimal CSV support for the artifact files: no quoting needed (all fields
// are numbers or plain labels).
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace evovox
