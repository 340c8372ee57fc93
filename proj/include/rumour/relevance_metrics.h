#pragma once

#include <chrono>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rumour/common.h"
#include "rumour/query_builder.h"
#include "rumour/retrieval.h"
#include "rumour/text_prep.h"

namespace rumour {

class NoScorablePairs : public Error {
 public:
  using Error::Error;
};

class NoKnownWords : public Error {
 public:
  using Error::Error;
};

class ScorerUnavailable : public Error {
 public:
  using Error::Error;
};

// Word vectors with lowercase lookup. Immutable once loaded.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dimension) : dimension_(dimension) {}

  // "word v1 ... vd" per line; the dimension comes from the first line. A
  // leading "count dim" header line (word2vec text format) is skipped.
  static EmbeddingStore load(const std::string& path);
  static EmbeddingStore read(std::istream& in);

  // First entry wins when two words lowercase to the same key.
  void add(std::string_view word, std::vector<double> vec);

  std::optional<std::span<const double>> lookup(std::string_view word) const;
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

  EmbeddingStore scaled(double factor) const;

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Unweighted mean of the in-vocabulary words; nullopt if none are known.
std::optional<std::vector<double>> mean_vector(const std::vector<std::string>& words,
                                               const EmbeddingStore& store);

// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Content words of a URL: host labels left after dropping the site name and
// public suffix, plus path segments split on non-letters, each segmented
// into dictionary words, lowercased, with stopwords and URL boilerplate
// ("www", "html", ...) removed.
std::vector<std::string> url_words(std::string_view url, const SegmentationDictionary& dict);

// Clamped cosine of every (article URL, response URL) pair with known
// words on both sides. Unparseable URLs are skipped.
std::vector<double> url_word_cosines(const std::vector<ArticleDoc>& articles,
                                     const std::vector<std::string>& response_urls,
                                     const EmbeddingStore& store, const SegmentationDictionary& dict);

// Mean of url_word_cosines; throws NoScorablePairs when there are none.
double url_words_score(const std::vector<ArticleDoc>& articles, const std::vector<std::string>& response_urls,
                       const EmbeddingStore& store, const SegmentationDictionary& dict);

// Title plus paragraphs, capped at three units.
std::vector<std::string> article_units(const ArticleDoc& article);

inline constexpr std::size_t kMaxArticleUnits = 3;

// Mean over units of the clamped cosine between the unit's mean vector and
// the rumour's mean vector. Units without known words are skipped; throws
// NoKnownWords when nothing is left.
double paragraph_score(const ArticleDoc& article, const PreprocessedTweet& rumour, const EmbeddingStore& store);

// Similarity of two texts computed by something outside the toolkit.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual double score(const std::string& a, const std::string& b) = 0;
};

// Talks the line protocol {"a": text, "b": text} -> {"score": real} to a
// child process (spawned through /bin/sh) or to a Unix socket given as
// "unix:/path".
class ExternalScorer : public PairScorer {
 public:
  explicit ExternalScorer(const std::string& endpoint,
                          std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~ExternalScorer() override;
  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  double score(const std::string& a, const std::string& b) override;

 private:
  std::string read_line();

  int fd_ = -1;
  int child_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

// Same unit structure as paragraph_score with the pair similarity delegated
// to `scorer`; the per-unit values are clamped to [0,1] and averaged.
double external_score(const ArticleDoc& article, const PreprocessedTweet& rumour, PairScorer& scorer);

enum class Metric { kUrlWords, kParagraphEmbedding, kExternal };
std::string_view metric_name(Metric m);

struct MetricReport {
  Strategy strategy = Strategy::kPreprocessed;
  double url_words_score = 0.0;
  double paragraph_embed_score = 0.0;
  std::optional<double> external_score;
  std::size_t n_articles = 0;
  std::size_t url_pairs = 0;
  std::size_t paragraph_articles = 0;
};

struct RumourContext {
  PreprocessedTweet tweet;
  std::vector<std::string> response_urls;
};

struct StrategyEvidence {
  Strategy strategy = Strategy::kPreprocessed;
  std::map<std::string, std::vector<ArticleDoc>> articles;  // keyed by thread id
};

struct MetricResources {
  const EmbeddingStore* url_store = nullptr;
  const EmbeddingStore* paragraph_store = nullptr;
  const SegmentationDictionary* dict = nullptr;
  PairScorer* external = nullptr;  // optional
};

struct StrategyComparison {
  std::vector<MetricReport> rows;
  // Strategies best-first per metric (ties keep input order).
  std::map<Metric, std::vector<Strategy>> order;
  // True when every metric yields the same order.
  bool consistent_order = true;
};

// Dataset-level scores per strategy. URL-word cosines are pooled over all
// pairs in the dataset; paragraph and external scores are averaged over
// every scorable article.
MetricReport score_strategy(const StrategyEvidence& evidence, const std::map<std::string, RumourContext>& rumours,
                            const MetricResources& res);

StrategyComparison compare_strategies(const std::vector<StrategyEvidence>& evidence,
                                      const std::map<std::string, RumourContext>& rumours,
                                      const MetricResources& res);

}  // namespace rumour
