#include "opinion_loom/provenance.hpp"

#include <array>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace opinion_loom {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int k = 0; k < length; ++k) {
    out.push_back(kHex[digest[k] >> 4]);
    out.push_back(kHex[digest[k] & 0x0f]);
  }
  return out;
}

std::string canonical_prompt(const PromptRecord& prompt) {
  std::string out = "system: " + prompt.system + "\n";
  for (const auto& turn : prompt.history) {
    out += to_string(turn.role);
    out += ": ";
    out += turn.text;
    out += "\n";
  }
  return out;
}

std::string prompt_sha256(const PromptRecord& prompt) { return sha256_hex(canonical_prompt(prompt)); }

std::string rfc3339_utc(std::chrono::system_clock::time_point when) {
  const auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(when.time_since_epoch()).count() % 1000;
  const std::time_t seconds = std::chrono::system_clock::to_time_t(when);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << millis << 'Z';
  return out.str();
}

std::string rfc3339_utc_now() { return rfc3339_utc(std::chrono::system_clock::now()); }

}  // namespace opinion_loom
