#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rumour/common.h"
#include "rumour/query_builder.h"

namespace rumour {

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class QuotaExceeded : public Error {
 public:
  using Error::Error;
};

struct BackendCapabilities {
  std::string name;
  bool supports_date_filter = false;
};

struct SearchResult {
  std::string url;
  int rank = 0;  // 1-based, contiguous per query
  std::string backend_name;
};

struct ArticleDoc {
  std::string url;
  std::string title;
  std::vector<std::string> paragraphs;
  int retrieved_rank = 0;
  std::string fetch_date;  // ISO-8601 UTC timestamp
  bool is_empty = true;

  friend bool operator==(const ArticleDoc&, const ArticleDoc&) = default;
};

// Sets is_empty from the title/paragraph invariant.
void refresh_emptiness(ArticleDoc& doc);

// Minimum length of a text run to count as a paragraph.
inline constexpr std::size_t kMinParagraphChars = 20;

// Title from <title>/og:title or the first <h1>; paragraphs from block
// level text runs of at least kMinParagraphChars characters, with
// navigation, header/footer, script and similar boilerplate dropped.
// Plain-text blobs (no markup) use their first line as the title and
// blank-line separated blocks as paragraphs.
ArticleDoc extract_article(std::string_view blob, std::string_view url);

// Lowercase alphanumeric terms, the unit of indexing and query matching.
std::vector<std::string> index_terms(std::string_view text);

struct CorpusDocument {
  std::string url;
  std::string title;
  std::vector<std::string> paragraphs;
  Date publish_date;
};

// Immutable BM25 index over an offline document collection.
class OfflineCorpusIndex {
 public:
  struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
  };

  OfflineCorpusIndex() = default;
  explicit OfflineCorpusIndex(std::vector<CorpusDocument> docs);

  // JSON Lines: url, title, paragraphs (array), publish_date (ISO-8601).
  static OfflineCorpusIndex load(const std::string& path);
  static OfflineCorpusIndex read(std::istream& in);

  const std::vector<CorpusDocument>& documents() const { return docs_; }
  const std::vector<Posting>* postings(const std::string& term) const;
  std::uint32_t doc_length(std::uint32_t doc) const { return lengths_[doc]; }
  double average_length() const { return avg_length_; }
  std::size_t size() const { return docs_.size(); }
  const CorpusDocument* find(const std::string& url) const;

 private:
  std::vector<CorpusDocument> docs_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> lengths_;
  double avg_length_ = 0.0;
  std::unordered_map<std::string, std::uint32_t> by_url_;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
double bm25_idf(std::size_t num_docs, std::size_t df);

struct ScoredDoc {
  std::uint32_t doc = 0;
  double score = 0.0;
};

// Distinct query terms: body tokens plus OR-group words (as should-terms).
std::vector<std::string> query_terms(const Query& q);

// Documents dated strictly before the cutoff that match at least one term,
// best first, ties by URL. Index statistics cover the whole collection.
std::vector<ScoredDoc> score_offline(const OfflineCorpusIndex& index, const Query& q,
                                     const Bm25Params& params = {});

std::vector<SearchResult> rank_offline(const OfflineCorpusIndex& index, const Query& q,
                                       std::size_t k, const Bm25Params& params = {});

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual BackendCapabilities capabilities() const = 0;
  // Results for ranks offset+1 .. offset+count; fewer when exhausted.
  virtual std::vector<SearchResult> query(const Query& q, std::size_t offset, std::size_t count) = 0;
  virtual ArticleDoc fetch(const SearchResult& r) = 0;
  // Fetches several results; backends may overlap requests.
  virtual std::vector<ArticleDoc> fetch_all(const std::vector<SearchResult>& results);
};

class OfflineBackend : public SearchBackend {
 public:
  explicit OfflineBackend(std::shared_ptr<const OfflineCorpusIndex> index, Bm25Params params = {});

  BackendCapabilities capabilities() const override;
  std::vector<SearchResult> query(const Query& q, std::size_t offset, std::size_t count) override;
  ArticleDoc fetch(const SearchResult& r) override;

 private:
  std::shared_ptr<const OfflineCorpusIndex> index_;
  Bm25Params params_;
};

struct LiveBackendConfig {
  // Search API endpoint, e.g. "https://www.googleapis.com/customsearch/v1".
  std::string endpoint;
  std::string api_key;
  std::string engine_id;
  // When true the "before:" operator travels inside the query string;
  // otherwise it is stripped and sent as `date_param`.
  bool pass_before_operator = true;
  std::string date_param = "before";
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double requests_per_second = 1.0;  // per host; <= 0 disables the limiter
  std::size_t max_in_flight = 4;
  std::chrono::seconds timeout{20};

  // Reads RUMOUR_SEARCH_ENDPOINT, RUMOUR_SEARCH_API_KEY, RUMOUR_SEARCH_ENGINE_ID.
  static LiveBackendConfig from_environment();
};

// Per-host spacing of requests, shared by all workers of one backend.
class HostRateLimiter {
 public:
  explicit HostRateLimiter(double requests_per_second);
  void acquire(const std::string& host);

 private:
  std::chrono::nanoseconds interval_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

// Thin HTTP(S) client over a JSON search API ({"items":[{"link":...}]}) that
// fetches result pages and runs them through extract_article.
class LiveBackend : public SearchBackend {
 public:
  explicit LiveBackend(LiveBackendConfig config);

  BackendCapabilities capabilities() const override;
  std::vector<SearchResult> query(const Query& q, std::size_t offset, std::size_t count) override;
  ArticleDoc fetch(const SearchResult& r) override;
  std::vector<ArticleDoc> fetch_all(const std::vector<SearchResult>& results) override;

  // Request parameters for the API call, exposed for inspection.
  std::vector<std::pair<std::string, std::string>> request_params(const Query& q, std::size_t offset,
                                                                  std::size_t count) const;

 private:
  struct Response {
    int status = 0;
    std::string body;
  };
  Response get_with_retry(const std::string& url);

  LiveBackendConfig config_;
  HostRateLimiter limiter_;
};

// Collects up to `want` non-empty articles in backend rank order, paging
// deeper until enough are found or the results run out. Results ranked at
// or below `skip_through` are ignored, which lets callers continue a
// previous pass.
std::vector<ArticleDoc> search(const Query& q, SearchBackend& backend, std::size_t want = 5,
                               int skip_through = 0);

// Runs `passes` consecutive passes of `per_pass` articles each and returns
// their concatenation (URLs unique).
std::vector<ArticleDoc> collect_evidence(const Query& q, SearchBackend& backend, std::size_t passes,
                                         std::size_t per_pass);

std::string utc_timestamp_now();

}  // namespace rumour
