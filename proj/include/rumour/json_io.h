#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rumour/parse_ingest.h"
#include "rumour/query_builder.h"
#include "rumour/retrieval.h"
#include "rumour/sentence_select.h"
#include "rumour/text_prep.h"

namespace rumour {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class SchemaVersionMismatch : public Error {
 public:
  SchemaVersionMismatch(int found, int expected)
      : Error("schema version " + std::to_string(found) + " (expected " + std::to_string(expected) + ")"),
        found_(found) {}
  int found() const { return found_; }

 private:
  int found_;
};

// First line of every stage output file.
struct FileHeader {
  std::string stage;
  std::string config_hash;
  std::uint64_t seed = 0;
  int schema_version = kSchemaVersion;
};

Json header_json(const FileHeader& h);

// A JSON Lines file whose first line may be a header record.
struct JsonLines {
  std::optional<FileHeader> header;
  std::vector<Json> records;
};

// Throws SchemaVersionMismatch when a header or record carries a
// schema_version other than kSchemaVersion.
JsonLines read_json_lines(std::istream& in);
JsonLines read_json_lines(const std::string& path);
void write_json_lines(std::ostream& out, const FileHeader& header, const std::vector<Json>& records);
void write_json_lines(const std::string& path, const FileHeader& header, const std::vector<Json>& records);

Json to_json(const RawTweet& t);
RawTweet raw_tweet_from_json(const Json& j, Event event);

Json to_json(const PreprocessedTweet& t);
PreprocessedTweet preprocessed_from_json(const Json& j);

Json to_json(const Query& q);
Query query_from_json(const Json& j);

Json to_json(const ArticleDoc& a);
ArticleDoc article_from_json(const Json& j);

Json to_json(const ScoredSentence& s);
ScoredSentence sentence_from_json(const Json& j);

}  // namespace rumour
