#pragma once

#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rumour/common.h"

namespace rumour {

class MalformedParse : public Error {
 public:
  MalformedParse(std::size_t line, const std::string& what)
      : Error("CoNLL-U line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SpanNotFound : public Error {
 public:
  SpanNotFound(const std::string& id, const std::string& field)
      : Error("triple for '" + id + "': " + field + " span not found in parse"),
        id_(id),
        field_(field) {}
  const std::string& id() const { return id_; }
  const std::string& field() const { return field_; }

 private:
  std::string id_;
  std::string field_;
};

struct ParseToken {
  int index = 0;  // 1-based
  std::string surface;
  std::string lemma;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;
};

struct ParsedSentence {
  std::string sentence_id;
  std::vector<ParseToken> tokens;  // tokens[i].index == i + 1

  const ParseToken& at(int index) const { return tokens.at(static_cast<std::size_t>(index - 1)); }
  int size() const { return static_cast<int>(tokens.size()); }
};

// Token indices into one ParsedSentence, each list sorted ascending.
struct Triple {
  std::vector<int> subject;
  std::vector<int> predicate;
  std::vector<int> object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

using ParseMap = std::map<std::string, ParsedSentence>;
using TripleMap = std::map<std::string, std::vector<Triple>>;

// Checks index contiguity, head range, a single root and acyclicity.
// Throws MalformedParse pointing at `first_line` (the block start).
void validate_parse(const ParsedSentence& s, std::size_t first_line = 0);

// Reads CoNLL-U. Sentence ids come from "# sent_id = ..." comments
// (falling back to "# id = ..."). Multiword ranges and empty nodes are
// skipped. With `problems` null the first malformed block throws; otherwise
// malformed blocks are recorded there and skipped.
ParseMap read_parses(std::istream& in, std::vector<MalformedParse>* problems = nullptr);
ParseMap read_parses(const std::string& path, std::vector<MalformedParse>* problems = nullptr);

// Relations whose words a deprel-shortened query keeps.
const std::set<std::string>& query_relations();

// Tokens whose relation is in `relations`, plus the heads of retained
// compound/amod/nummod modifiers, in sentence order without duplicates.
std::vector<int> retain_by_deprel(const ParsedSentence& s, const std::set<std::string>& relations);

// Clause-level (subject, predicate, object) extraction from a dependency
// tree. One triple per verbal or copular head that has a nominal subject.
std::vector<Triple> extract_triples(const ParsedSentence& s);

// Reads "id<TAB>subject<TAB>predicate<TAB>object" lines (object may be
// empty) and aligns the spans to `parses`. With `problems` null the first
// unmatchable line throws SpanNotFound.
TripleMap read_triples(std::istream& in, const ParseMap& parses,
                       std::vector<SpanNotFound>* problems = nullptr);
TripleMap read_triples(const std::string& path, const ParseMap& parses,
                       std::vector<SpanNotFound>* problems = nullptr);

// Aligns one whitespace-separated span, avoiding indices in `used`.
// Greedy: repeatedly takes the longest contiguous run of the remaining span
// words found in the sentence, preferring the first run after the previous
// one. Returns an empty vector when some word cannot be placed.
std::vector<int> match_span(const ParsedSentence& s, const std::vector<std::string>& words,
                            const std::set<int>& used);

// Sorted union of all indices mentioned by `triples`.
std::vector<int> triple_token_union(const std::vector<Triple>& triples);

std::vector<std::string> surfaces(const ParsedSentence& s, const std::vector<int>& indices);

}  // namespace rumour
