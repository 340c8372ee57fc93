#pragma once

#include <map>
#include <string>
#include <vector>

#include "rumour/common.h"
#include "rumour/parse_ingest.h"
#include "rumour/retrieval.h"
#include "rumour/stopwords.h"
#include "rumour/text_prep.h"

namespace rumour {

struct SelectionConfig {
  std::size_t min_len = 5;
  std::size_t max_len = 20;
  double penalty_per_word = 0.02;
  std::size_t top_k = 5;
  StopwordSet stopwords = default_stopwords();

  // Throws ValidationError unless 0 < min_len < max_len, 0 <= penalty < 1
  // and top_k >= 1.
  void validate() const;
};

struct ScoredSentence {
  std::string text;
  std::vector<std::string> tokens;
  std::string source_url;
  int article_rank = 0;
  int position_in_article = 0;  // sentence index within the article
  int raw_overlap = 0;
  double final_score = 0.0;

  friend bool operator==(const ScoredSentence&, const ScoredSentence&) = default;
};

// Key used for externally supplied triple words: "<url>#<position>".
std::string sentence_key(const std::string& url, int position);

// sentence key -> words of the triples extracted from that sentence.
using TripleWordMap = std::map<std::string, std::vector<std::string>>;

// Words covered by the heuristic triples of a parsed sentence.
std::vector<std::string> triple_words(const ParsedSentence& s);

// Splits at '.', '!' or '?' (plus closing quotes/brackets) followed by
// whitespace and an uppercase letter, digit or opening quote, except after
// known abbreviations and single-letter initials.
std::vector<std::string> split_sentences(std::string_view paragraph);

// Length-penalised score for a sentence of `length` tokens.
double penalised_score(int raw_overlap, std::size_t length, const SelectionConfig& cfg);

// Order of the selection output: score descending, then article rank, then
// position in article.
bool ranks_before(const ScoredSentence& a, const ScoredSentence& b);

// Every sentence of every article with its overlap and penalised score,
// sentences shorter than min_len excluded, in reading order. Sentences
// without an entry in `triple_words` fall back to their own tokens.
std::vector<ScoredSentence> score_sentences(const PreprocessedTweet& rumour, const std::vector<ArticleDoc>& articles,
                                            const TripleWordMap& triple_words, const SelectionConfig& cfg);

// Top cfg.top_k sentences among those with a positive score.
std::vector<ScoredSentence> rank_sentences(const PreprocessedTweet& rumour, const std::vector<ArticleDoc>& articles,
                                           const TripleWordMap& triple_words, const SelectionConfig& cfg);

class InsufficientEvidence : public Error {
 public:
  InsufficientEvidence(const std::string& id, std::vector<ScoredSentence> partial, std::size_t wanted)
      : Error("rumour '" + id + "': only " + std::to_string(partial.size()) + " of " + std::to_string(wanted) +
              " evidence sentences score above zero"),
        partial_(std::move(partial)) {}
  const std::vector<ScoredSentence>& partial() const { return partial_; }

 private:
  std::vector<ScoredSentence> partial_;
};

// rank_sentences, but throws InsufficientEvidence (carrying the partial
// list) when fewer than top_k sentences score above zero.
std::vector<ScoredSentence> select_sentences(const PreprocessedTweet& rumour, const std::vector<ArticleDoc>& articles,
                                             const TripleWordMap& triple_words, const SelectionConfig& cfg);

}  // namespace rumour
