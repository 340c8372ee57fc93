#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumour/common.h"

namespace rumour {

class EmptyTweet : public Error {
 public:
  explicit EmptyTweet(const std::string& id)
      : Error("tweet '" + id + "' is empty after cleaning"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

struct RawTweet {
  std::string id;
  std::string text;
  Date created_at;
  Event event = Event::kCharlieHebdo;
  std::string author_handle;

  friend bool operator==(const RawTweet&, const RawTweet&) = default;
};

struct PreprocessedTweet {
  std::string source_id;
  std::vector<std::string> tokens;
  std::vector<std::string> extracted_urls;
  // Hashtags (without '#') that closed the tweet once URLs were removed.
  std::vector<std::string> trailing_hashtags;
  // Token positions of hashtags kept mid-text (with '#' stripped).
  std::vector<std::size_t> inner_hashtag_tokens;
  // Removed mention strings including the '@', in text order.
  std::vector<std::string> mention_handles;
  // Token positions of the "user" tokens that replaced mentions.
  std::vector<std::size_t> mention_tokens;
  Date date_cutoff;

  friend bool operator==(const PreprocessedTweet&, const PreprocessedTweet&) = default;
};

// Unigram word counts used to split compound hashtags.
class SegmentationDictionary {
 public:
  SegmentationDictionary() = default;

  // "word<TAB>count" per line. Words are lowercased; repeated words add up.
  static SegmentationDictionary load(const std::string& path);
  static SegmentationDictionary read(std::istream& in);

  void add(std::string_view word, std::uint64_t count);

  bool contains(std::string_view word) const;
  std::uint64_t count(std::string_view word) const;
  std::uint64_t total_count() const { return total_; }
  std::size_t vocabulary_size() const { return counts_.size(); }
  std::size_t max_word_length() const { return max_len_; }

  // log((count + 1) / (total + |V|)); only meaningful for contained words.
  double log_prob(std::string_view word) const;

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::size_t max_len_ = 0;
};

PreprocessedTweet preprocess(const RawTweet& raw);

// URLs in `text` (http://, https://, or a leading "www."), each running to
// the next whitespace.
std::vector<std::string> extract_urls(std::string_view text);

// Splits a whitespace-free string the way a Penn-treebank tokenizer would:
// punctuation peeled off word edges, clitics ("n't", "'s") split, internal
// periods of abbreviations kept. Joining the output with spaces and
// tokenizing again yields the same tokens.
std::vector<std::string> treebank_tokenize(std::string_view text);

// Maximum-likelihood split of a hashtag body into dictionary words.
// Camel-case boundaries are tried first; falls back to the tag itself.
std::vector<std::string> segment_hashtag(std::string_view tag, const SegmentationDictionary& dict);

// Dynamic-programming segmentation of `text` (matched case-insensitively)
// without the camel-case hint. nullopt when no full split exists. The
// returned pieces are slices of `text`.
std::optional<std::vector<std::string>> segment_words(std::string_view text,
                                                      const SegmentationDictionary& dict);

// Ordering used by the segmenter: higher probability first, then fewer
// words, then longer leading words. Exposed so tests can rank candidate
// splits with the same rule.
struct SplitScore {
  double log_prob = 0.0;
  std::vector<std::size_t> lengths;
};
bool split_better(const SplitScore& a, const SplitScore& b);

// Pieces of a tag split at lower->Upper, letter<->digit and
// "ABCDef" -> "ABC" "Def" transitions.
std::vector<std::string> camel_case_pieces(std::string_view tag);

}  // namespace rumour
