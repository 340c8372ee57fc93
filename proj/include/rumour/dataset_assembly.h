#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rumour/common.h"
#include "rumour/json_io.h"
#include "rumour/query_builder.h"
#include "rumour/retrieval.h"
#include "rumour/sentence_select.h"
#include "rumour/text_prep.h"

namespace rumour {

class MissingAnnotation : public Error {
 public:
  explicit MissingAnnotation(const std::string& thread_id)
      : Error("thread '" + thread_id + "' has no veracity annotation"), thread_id_(thread_id) {}
  const std::string& thread_id() const { return thread_id_; }

 private:
  std::string thread_id_;
};

class MalformedTweet : public Error {
 public:
  MalformedTweet(const std::string& file, const std::string& what)
      : Error("malformed tweet in '" + file + "': " + what), file_(file) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

struct ThreadEntry {
  RawTweet source;
  std::vector<RawTweet> reactions;
  std::vector<std::string> reaction_urls;
  Label label = Label::kUnverified;
  Event event = Event::kCharlieHebdo;

  const std::string& id() const { return source.id; }
  friend bool operator==(const ThreadEntry&, const ThreadEntry&) = default;
};

struct EnrichedEntry {
  ThreadEntry thread;
  std::vector<ArticleDoc> articles;
  std::vector<ScoredSentence> selected_sentences;
  Strategy strategy_used = Strategy::kPreprocessed;
  // True when selected_sentences holds the full top_k.
  bool complete = false;

  friend bool operator==(const EnrichedEntry&, const EnrichedEntry&) = default;
};

// Twitter v1.1 status object (id_str, text/full_text, created_at, user,
// entities.urls).
RawTweet tweet_from_twitter_json(const Json& j, Event event, const std::string& file);

// URLs mentioned in a tweet, with t.co links replaced by their expansion
// when the entities block carries one.
std::vector<std::string> tweet_urls(const Json& j);

// Annotation record -> label. Reads "veracity" when present, otherwise the
// "misinformation"/"true" flags (both zero means unverified).
Label label_from_annotation(const Json& j, const std::string& thread_id);

// Reads <root>/<event dir>/[rumours/]<thread id>/{annotation.json,
// source-tweets/*.json, reactions/*.json}. Threads come back in event order,
// then thread id order.
std::vector<ThreadEntry> load_corpus(const std::string& root);

struct EventStats {
  std::size_t threads = 0;
  std::array<std::size_t, 3> labels{};  // indexed by Label
  std::size_t articles = 0;

  std::size_t count(Label l) const { return labels[static_cast<std::size_t>(l)]; }
  friend bool operator==(const EventStats&, const EventStats&) = default;
};

struct CorpusStats {
  std::map<Event, EventStats> per_event;
  EventStats total;

  // Throws Error when label counts, event counts and totals disagree.
  void check_cross_footing() const;
};

CorpusStats compute_stats(const std::vector<ThreadEntry>& threads);
CorpusStats compute_stats(const std::vector<EnrichedEntry>& entries);
std::string format_stats(const CorpusStats& stats);

struct AssemblyConfig {
  SelectionConfig selection;
  Strategy strategy = Strategy::kPreprocessed;
  std::size_t max_articles = 10;
  std::size_t workers = 1;
};

struct AssemblyResult {
  std::vector<EnrichedEntry> entries;
  std::size_t complete = 0;

  double completeness_ratio() const {
    return entries.empty() ? 0.0 : static_cast<double>(complete) / static_cast<double>(entries.size());
  }
};

using EvidenceStore = std::map<std::string, std::vector<ArticleDoc>>;

// Joins threads with their evidence by thread id. Empty articles are dropped,
// articles are capped at max_articles, and entries short of top_k scoring
// sentences are kept with complete = false.
AssemblyResult assemble(const std::vector<ThreadEntry>& threads, const EvidenceStore& evidence,
                        const AssemblyConfig& cfg, const TripleWordMap& triple_words = {});

struct SourceCounts {
  std::size_t overall = 0;
  std::size_t unique = 0;
  friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

struct OverlapReport {
  SourceCounts web;
  SourceCounts thread;
  SourceCounts overlap;
  // Same counts restricted to non-empty pages. Only filled when a page
  // check was supplied.
  bool has_not_empty = false;
  SourceCounts web_not_empty;
  SourceCounts thread_not_empty;
  SourceCounts overlap_not_empty;
};

// Canonical form used by the overlap analysis; unparseable strings are kept
// verbatim.
std::string overlap_key(const std::string& url, const std::map<std::string, std::string>& expansions);

// overall counts every occurrence; unique counts canonical URLs. The
// overall overlap is the multiset intersection: for every canonical URL on
// both sides, the smaller of its two occurrence counts.
OverlapReport overlap_report(const std::vector<EnrichedEntry>& entries,
                             const std::map<std::string, std::string>& expansions = {},
                             const std::function<bool(const std::string&)>& page_is_empty = {});
std::string format_overlap(const OverlapReport& r);

Json to_json(const ThreadEntry& t);
ThreadEntry thread_from_json(const Json& j);
Json to_json(const EnrichedEntry& e);
EnrichedEntry entry_from_json(const Json& j);

void write_dataset(std::ostream& out, const std::vector<EnrichedEntry>& entries, const FileHeader& header);
void write_dataset(const std::string& path, const std::vector<EnrichedEntry>& entries, const FileHeader& header);
std::vector<EnrichedEntry> read_dataset(std::istream& in);
std::vector<EnrichedEntry> read_dataset(const std::string& path);

}  // namespace rumour
