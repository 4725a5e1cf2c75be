#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fogplace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter);
std::string_view trim(std::string_view s);

/// Reads a whole file; gzip-compressed input is inflated transparently.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

}  // namespace fogplace
