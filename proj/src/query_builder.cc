#include "rumour/query_builder.h"

namespace rumour {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kPreprocessed: return "preprocessed";
    case Strategy::kDeprelShortened: return "deprel";
    case Strategy::kTripleShortened: return "triple";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies)
    if (name == strategy_name(s)) return s;
  return std::nullopt;
}

Query build_query(const PreprocessedTweet& tweet, const ParsedSentence* parse,
                  const std::vector<Triple>* triples, Strategy strategy,
                  const SegmentationDictionary& dict) {
  Query q;
  q.source_id = tweet.source_id;
  q.strategy = strategy;
  q.date_cutoff = tweet.date_cutoff;

  switch (strategy) {
    case Strategy::kPreprocessed:
      q.body_tokens = tweet.tokens;
      break;
    case Strategy::kDeprelShortened:
      if (!parse) throw ValidationError("deprel strategy needs a parse for '" + tweet.source_id + "'");
      q.body_tokens = surfaces(*parse, retain_by_deprel(*parse, query_relations()));
      break;
    case Strategy::kTripleShortened: {
      if (triples) {
        if (!parse) throw ValidationError("triple strategy needs a parse for '" + tweet.source_id + "'");
        q.body_tokens = surfaces(*parse, triple_token_union(*triples));
      } else if (parse) {
        q.body_tokens = surfaces(*parse, triple_token_union(extract_triples(*parse)));
      } else {
        throw ValidationError("triple strategy needs triples or a parse for '" + tweet.source_id + "'");
      }
      break;
    }
  }
  if (q.body_tokens.empty()) throw EmptyQueryBody(tweet.source_id);

  // The full-text strategy carries no OR-group.
  if (strategy != Strategy::kPreprocessed)
    for (const auto& tag : tweet.trailing_hashtags) q.or_group.push_back(segment_hashtag(tag, dict));
  return q;
}

std::string render(const Query& q) {
  std::string out = "before:" + q.date_cutoff.iso();
  std::vector<std::string> words;
  for (const auto& group : q.or_group) words.insert(words.end(), group.begin(), group.end());
  if (!words.empty()) out += " (" + join(words, " ") + ")";
  if (!q.body_tokens.empty()) out += " " + join(q.body_tokens, " ");
  return out;
}

}  // namespace rumour
