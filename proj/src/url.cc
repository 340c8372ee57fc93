#include "rumour/url.h"

#include <algorithm>
#include <cctype>
#include <set>

namespace rumour {

namespace {

// Second-level labels that form a public suffix together with a ccTLD.
const std::set<std::string>& second_level_suffixes() {
  static const std::set<std::string> kSuffixes = {"co", "com", "org", "net", "ac",
                                                  "gov", "edu", "ne", "or", "gob"};
  return kSuffixes;
}

bool is_tracking_param(std::string_view key) {
  std::string k = to_lower(key);
  return k.starts_with("utm_") || k == "fbclid" || k == "gclid";
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl out;
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) throw UnparseableUrl(std::string(url));
  out.scheme = std::string(url.substr(0, sep));
  for (char c : out.scheme)
    if (!is_alpha_ascii(c) && !is_digit_ascii(c) && c != '+' && c != '-' && c != '.')
      throw UnparseableUrl(std::string(url));
  std::string_view rest = url.substr(sep + 3);

  auto hash = rest.find('#');
  if (hash != std::string_view::npos) {
    out.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  auto qm = rest.find('?');
  if (qm != std::string_view::npos) {
    out.query = std::string(rest.substr(qm + 1));
    rest = rest.substr(0, qm);
  }
  auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) out.path = std::string(rest.substr(slash));

  auto at = authority.rfind('@');
  if (at != std::string_view::npos) authority = authority.substr(at + 1);
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    out.port = std::string(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
    if (out.port.empty() || !std::all_of(out.port.begin(), out.port.end(), is_digit_ascii))
      throw UnparseableUrl(std::string(url));
  }
  out.host = std::string(authority);
  if (out.host.empty()) throw UnparseableUrl(std::string(url));
  for (char c : out.host)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>' || c == '"')
      throw UnparseableUrl(std::string(url));
  return out;
}

std::string normalize_url(std::string_view url) {
  ParsedUrl u = parse_url(url);
  std::string scheme = to_lower(u.scheme);
  std::string host = to_lower(u.host);
  while (host.starts_with("www.")) host = host.substr(4);
  while (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) throw UnparseableUrl(std::string(url));

  std::string out = scheme + "://" + host;
  bool default_port = (scheme == "http" && u.port == "80") || (scheme == "https" && u.port == "443");
  if (!u.port.empty() && !default_port) out += ":" + u.port;

  std::string path = u.path;
  while (!path.empty() && path.back() == '/') path.pop_back();
  out += path;

  std::vector<std::string> kept;
  if (!u.query.empty()) {
    for (auto& kv : split_on(u.query, '&')) {
      if (kv.empty()) continue;
      std::string key = kv.substr(0, kv.find('='));
      if (!is_tracking_param(key)) kept.push_back(kv);
    }
  }
  if (!kept.empty()) out += "?" + join(kept, "&");
  return out;
}

std::string normalize_url(std::string_view url, const std::map<std::string, std::string>& expansions) {
  std::string target(url);
  for (int hops = 0; hops < 8; ++hops) {
    auto it = expansions.find(target);
    if (it == expansions.end()) it = expansions.find(normalize_url(target));
    if (it == expansions.end() || it->second == target) break;
    target = it->second;
  }
  return normalize_url(target);
}

std::vector<std::string> host_content_labels(std::string_view host) {
  auto labels = split_on(to_lower(host), '.');
  labels.erase(std::remove(labels.begin(), labels.end(), std::string()), labels.end());
  if (labels.size() <= 1) return {};
  std::size_t drop = 2;  // registrable label + TLD
  if (labels.size() >= 3 && labels.back().size() == 2 &&
      second_level_suffixes().count(labels[labels.size() - 2]))
    drop = 3;
  if (labels.size() <= drop) return {};
  std::vector<std::string> out(labels.begin(), labels.end() - static_cast<std::ptrdiff_t>(drop));
  out.erase(std::remove(out.begin(), out.end(), std::string("www")), out.end());
  return out;
}

}  // namespace rumour
