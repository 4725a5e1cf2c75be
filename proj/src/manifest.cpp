#include "fogplace/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>

#include "fogplace/error.hpp"
#include "fogplace/serialize.hpp"

namespace fogplace {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw InvariantViolation("sha256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string utc_now() {
  using namespace std::chrono;
  const auto now = time_point_cast<milliseconds>(system_clock::now());
  const auto day = floor<days>(now);
  const year_month_day ymd{day};
  const hh_mm_ss hms{now - day};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()), static_cast<long>(hms.subseconds().count()));
  return buf;
}

std::string RunManifest::fingerprint() const {
  std::string s = command + "\n" + config + "\n" + std::to_string(seed) + "\n" + kToolVersion + "\n";
  for (const auto& [path, digest] : inputs) s += digest + "\n";
  return sha256_hex(s);
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json in = nlohmann::json::array(), out = nlohmann::json::array();
  for (const auto& [p, d] : inputs) in.push_back({{"path", p}, {"sha256", d}});
  for (const auto& [p, d] : outputs) out.push_back({{"path", p}, {"sha256", d}});
  return {{"schema", {{"kind", "manifest"}, {"version", kManifestSchema}}},
          {"command", command},
          {"tool_version", kToolVersion},
          {"schema_versions",
           {{"topology", kTopologySchema},
            {"instance", kInstanceSchema},
            {"solution", kSolutionSchema},
            {"arima", kArimaSchema},
            {"lstm", kLstmSchema},
            {"reservation", kReservationSchema},
            {"report", kReportSchema}}},
          {"seed", seed},
          {"config", config},
          {"config_hash", config_hash()},
          {"fingerprint", fingerprint()},
          {"inputs", in},
          {"outputs", out},
          {"started_utc", started_utc},
          {"finished_utc", finished_utc}};
}

void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot write '" + path + "'");
  os << m.to_json().dump(2) << "\n";
}

}  // namespace fogplace
