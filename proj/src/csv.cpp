#include "fogplace/csv.hpp"

#include <zlib.h>

#include <charconv>
#include <fstream>
#include <memory>

#include "fogplace/error.hpp"

namespace fogplace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string read_file(const std::string& path) {
  // gzread passes uncompressed files through unchanged.
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw InvalidInput("cannot open file: " + path);
  std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(f, gzclose);
  std::string out;
  char buf[1 << 16];
  while (true) {
    const int n = gzread(f, buf, sizeof(buf));
    if (n < 0) throw FormatError("read error in " + path);
    if (n == 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot write file: " + path);
  os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

double parse_double(std::string_view field, std::string_view what) {
  field = trim(field);
  // from_chars for double is available in libstdc++ 11
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw FormatError("invalid number for " + std::string(what) + ": '" + std::string(field) + "'");
  return v;
}

long long parse_int(std::string_view field, std::string_view what) {
  field = trim(field);
  long long v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw FormatError("invalid integer for " + std::string(what) + ": '" + std::string(field) + "'");
  return v;
}

}  // namespace fogplace
