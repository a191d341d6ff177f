#pragma once

#include <string>
#include <string_view>

#include "opinion_loom/errors.hpp"

namespace opinion_loom::detail {

struct ParsedUrl {
  /// "http://host:port" form accepted by httplib::Client.
  std::string origin;
  /// Path without trailing slash ("" for the root).
  std::string path;
};

inline ParsedUrl parse_url(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorKind::ConfigError, "URL '" + std::string(url) + "' has no scheme");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::ConfigError, "URL scheme must be http or https: '" + std::string(url) + "'");
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) parsed.path = std::string(url.substr(path_start));
  while (!parsed.path.empty() && parsed.path.back() == '/') parsed.path.pop_back();
  return parsed;
}

}  // namespace opinion_loom::detail
