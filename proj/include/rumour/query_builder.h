#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rumour/common.h"
#include "rumour/parse_ingest.h"
#include "rumour/text_prep.h"

namespace rumour {

enum class Strategy { kPreprocessed, kDeprelShortened, kTripleShortened };

inline constexpr std::array<Strategy, 3> kAllStrategies = {
    Strategy::kPreprocessed, Strategy::kDeprelShortened, Strategy::kTripleShortened};

// CLI names: preprocessed, deprel, triple.
std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

class EmptyQueryBody : public Error {
 public:
  explicit EmptyQueryBody(const std::string& id)
      : Error("query for '" + id + "' has no body tokens left"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

struct Query {
  std::string source_id;
  Strategy strategy = Strategy::kPreprocessed;
  Date date_cutoff;
  std::vector<std::string> body_tokens;
  // One word list per segmented trailing hashtag.
  std::vector<std::vector<std::string>> or_group;

  friend bool operator==(const Query&, const Query&) = default;
};

// DeprelShortened needs `parse`. TripleShortened uses `triples` when given,
// otherwise extracts them heuristically from `parse`. Throws
// ValidationError when the required input is missing and EmptyQueryBody
// when shortening leaves nothing.
Query build_query(const PreprocessedTweet& tweet, const ParsedSentence* parse,
                  const std::vector<Triple>* triples, Strategy strategy,
                  const SegmentationDictionary& dict);

// "before:YYYY-MM-DD [(or words) ]body".
std::string render(const Query& q);

}  // namespace rumour
