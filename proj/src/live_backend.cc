#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "rumour/retrieval.h"
#include "rumour/url.h"

namespace rumour {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path + query
  std::string host;
};

Target split_target(const std::string& url) {
  ParsedUrl u = parse_url(url);
  Target t;
  t.host = to_lower(u.host);
  t.origin = to_lower(u.scheme) + "://" + u.host + (u.port.empty() ? "" : ":" + u.port);
  t.path = u.path.empty() ? "/" : u.path;
  if (!u.query.empty()) t.path += "?" + u.query;
  return t;
}

bool quota_error(int status, const std::string& body) {
  if (status == 429) return true;
  return status == 403 && (body.find("quota") != std::string::npos ||
                           body.find("rateLimitExceeded") != std::string::npos ||
                           body.find("dailyLimitExceeded") != std::string::npos);
}

}  // namespace

LiveBackendConfig LiveBackendConfig::from_environment() {
  LiveBackendConfig c;
  c.endpoint = env_or_empty("RUMOUR_SEARCH_ENDPOINT");
  c.api_key = env_or_empty("RUMOUR_SEARCH_API_KEY");
  c.engine_id = env_or_empty("RUMOUR_SEARCH_ENGINE_ID");
  return c;
}

HostRateLimiter::HostRateLimiter(double requests_per_second)
    : interval_(requests_per_second > 0
                    ? std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / requests_per_second))
                    : std::chrono::nanoseconds(0)) {}

void HostRateLimiter::acquire(const std::string& host) {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto now = std::chrono::steady_clock::now();
    auto& next = next_slot_[host];
    slot = std::max(now, next);
    next = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

LiveBackend::LiveBackend(LiveBackendConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second) {
  if (config_.endpoint.empty()) throw ValidationError("live backend needs a search endpoint");
  parse_url(config_.endpoint);
}

BackendCapabilities LiveBackend::capabilities() const { return {"live", true}; }

std::vector<std::pair<std::string, std::string>> LiveBackend::request_params(const Query& q, std::size_t offset,
                                                                            std::size_t count) const {
  std::vector<std::pair<std::string, std::string>> params;
  std::string text = render(q);
  if (config_.pass_before_operator) {
    params.emplace_back("q", text);
  } else {
    std::string prefix = "before:" + q.date_cutoff.iso();
    std::string rest = text.substr(prefix.size());
    if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
    params.emplace_back("q", rest);
    params.emplace_back(config_.date_param, q.date_cutoff.iso());
  }
  if (!config_.api_key.empty()) params.emplace_back("key", config_.api_key);
  if (!config_.engine_id.empty()) params.emplace_back("cx", config_.engine_id);
  params.emplace_back("start", std::to_string(offset + 1));
  params.emplace_back("num", std::to_string(count));
  return params;
}

LiveBackend::Response LiveBackend::get_with_retry(const std::string& url) {
  Target t = split_target(url);
  auto backoff = config_.initial_backoff;
  std::string last_error = "no attempt made";
  for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
    limiter_.acquire(t.host);
    httplib::Client client(t.origin);
    client.set_follow_location(true);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    auto res = client.Get(t.path);
    if (res && res->status < 500) return {res->status, res->body};
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw BackendUnavailable("request to " + t.host + " failed: " + last_error);
}

std::vector<SearchResult> LiveBackend::query(const Query& q, std::size_t offset, std::size_t count) {
  Target base = split_target(config_.endpoint);
  std::string url = base.origin + base.path;
  url += url.find('?') == std::string::npos ? '?' : '&';
  bool first = true;
  for (const auto& [k, v] : request_params(q, offset, count)) {
    if (!first) url += '&';
    first = false;
    url += httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
  }
  Response res = get_with_retry(url);
  if (quota_error(res.status, res.body)) throw QuotaExceeded("search API quota exceeded (HTTP " + std::to_string(res.status) + ")");
  if (res.status != 200) throw BackendUnavailable("search API returned HTTP " + std::to_string(res.status));

  std::vector<SearchResult> out;
  try {
    auto j = nlohmann::json::parse(res.body);
    if (j.contains("items"))
      for (const auto& item : j.at("items")) {
        if (!item.contains("link")) continue;
        out.push_back({item.at("link").get<std::string>(), static_cast<int>(offset + out.size() + 1), "live"});
      }
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable(std::string("search API sent malformed JSON: ") + e.what());
  }
  if (out.size() > count) out.resize(count);
  return out;
}

ArticleDoc LiveBackend::fetch(const SearchResult& r) {
  ArticleDoc doc;
  doc.url = r.url;
  try {
    Response res = get_with_retry(r.url);
    if (res.status == 200) doc = extract_article(res.body, r.url);
  } catch (const Error&) {
    // Unreachable pages count as empty.
  }
  doc.retrieved_rank = r.rank;
  doc.fetch_date = utc_timestamp_now();
  refresh_emptiness(doc);
  return doc;
}

std::vector<ArticleDoc> LiveBackend::fetch_all(const std::vector<SearchResult>& results) {
  std::vector<ArticleDoc> out(results.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) out[i] = fetch(results[i]);
  };
  std::size_t n = std::min(std::max<std::size_t>(1, config_.max_in_flight), results.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace rumour
