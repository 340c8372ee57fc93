#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rumour/common.h"

namespace rumour {

class UnparseableUrl : public Error {
 public:
  explicit UnparseableUrl(const std::string& url) : Error("unparseable URL '" + url + "'"), url_(url) {}
  const std::string& url() const { return url_; }

 private:
  std::string url_;
};

struct ParsedUrl {
  std::string scheme;  // as written
  std::string host;    // as written, without port
  std::string port;    // empty when absent
  std::string path;    // starts with '/' or is empty
  std::string query;   // without '?'
  std::string fragment;
};

// scheme "://" host [":" port] [path] ["?" query] ["#" fragment].
ParsedUrl parse_url(std::string_view url);

// Lowercases scheme and host, drops "www.", default ports, the fragment,
// tracking parameters (utm_*, fbclid, gclid) and a trailing slash. Path case
// is kept. Idempotent.
std::string normalize_url(std::string_view url);

// As above, but first resolves shortened links through `expansions`
// (looked up by the raw URL and by its normalized form).
std::string normalize_url(std::string_view url, const std::map<std::string, std::string>& expansions);

// Host labels with the registrable domain and public suffix removed
// ("edition.cnn.com" -> {"edition"}). "www" is dropped too.
std::vector<std::string> host_content_labels(std::string_view host);

}  // namespace rumour
