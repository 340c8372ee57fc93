#include "rumour/json_io.h"

#include <fstream>

namespace rumour {

namespace {

template <typename T>
std::vector<T> vec(const Json& j, const char* key) {
  std::vector<T> out;
  if (j.contains(key))
    for (const auto& v : j.at(key)) out.push_back(v.get<T>());
  return out;
}

void check_version(const Json& j) {
  if (!j.contains("schema_version")) return;
  int v = j.at("schema_version").get<int>();
  if (v != kSchemaVersion) throw SchemaVersionMismatch(v, kSchemaVersion);
}

}  // namespace

Json header_json(const FileHeader& h) {
  Json j;
  j["kind"] = "header";
  j["stage"] = h.stage;
  j["schema_version"] = h.schema_version;
  j["config_hash"] = h.config_hash;
  j["seed"] = h.seed;
  return j;
}

JsonLines read_json_lines(std::istream& in) {
  JsonLines out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ValidationError("JSON Lines line " + std::to_string(line_no) + ": " + e.what());
    }
    check_version(j);
    if (line_no == 1 && j.is_object() && j.value("kind", "") == "header") {
      FileHeader h;
      h.stage = j.value("stage", "");
      h.config_hash = j.value("config_hash", "");
      h.seed = j.value("seed", std::uint64_t{0});
      h.schema_version = j.value("schema_version", kSchemaVersion);
      out.header = h;
      continue;
    }
    out.records.push_back(std::move(j));
  }
  return out;
}

JsonLines read_json_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_json_lines(in);
}

void write_json_lines(std::ostream& out, const FileHeader& header, const std::vector<Json>& records) {
  out << header_json(header).dump() << '\n';
  for (const auto& r : records) out << r.dump() << '\n';
}

void write_json_lines(const std::string& path, const FileHeader& header, const std::vector<Json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  write_json_lines(out, header, records);
  if (!out) throw Error("write to '" + path + "' failed");
}

Json to_json(const RawTweet& t) {
  Json j;
  j["id"] = t.id;
  j["text"] = t.text;
  j["created_at"] = t.created_at.iso();
  j["event"] = std::string(event_name(t.event));
  j["author_handle"] = t.author_handle;
  return j;
}

RawTweet raw_tweet_from_json(const Json& j, Event event) {
  RawTweet t;
  t.id = j.at("id").get<std::string>();
  t.text = j.at("text").get<std::string>();
  std::string created = j.at("created_at").get<std::string>();
  t.created_at = created.size() >= 10 && created[4] == '-' ? Date::parse(created) : Date::parse_twitter(created);
  t.event = event;
  if (j.contains("event")) {
    auto e = parse_event(j.at("event").get<std::string>());
    if (!e) throw ValidationError("unknown event '" + j.at("event").get<std::string>() + "'");
    t.event = *e;
  }
  t.author_handle = j.value("author_handle", std::string());
  return t;
}

Json to_json(const PreprocessedTweet& t) {
  Json j;
  j["source_id"] = t.source_id;
  j["date_cutoff"] = t.date_cutoff.iso();
  j["tokens"] = t.tokens;
  j["extracted_urls"] = t.extracted_urls;
  j["trailing_hashtags"] = t.trailing_hashtags;
  j["inner_hashtag_tokens"] = t.inner_hashtag_tokens;
  j["mention_handles"] = t.mention_handles;
  j["mention_tokens"] = t.mention_tokens;
  return j;
}

PreprocessedTweet preprocessed_from_json(const Json& j) {
  PreprocessedTweet t;
  t.source_id = j.at("source_id").get<std::string>();
  t.date_cutoff = Date::parse(j.at("date_cutoff").get<std::string>());
  t.tokens = vec<std::string>(j, "tokens");
  t.extracted_urls = vec<std::string>(j, "extracted_urls");
  t.trailing_hashtags = vec<std::string>(j, "trailing_hashtags");
  t.inner_hashtag_tokens = vec<std::size_t>(j, "inner_hashtag_tokens");
  t.mention_handles = vec<std::string>(j, "mention_handles");
  t.mention_tokens = vec<std::size_t>(j, "mention_tokens");
  return t;
}

Json to_json(const Query& q) {
  Json j;
  j["source_id"] = q.source_id;
  j["strategy"] = std::string(strategy_name(q.strategy));
  j["date_cutoff"] = q.date_cutoff.iso();
  j["body_tokens"] = q.body_tokens;
  j["or_group"] = q.or_group;
  j["rendered"] = render(q);
  return j;
}

Query query_from_json(const Json& j) {
  Query q;
  q.source_id = j.at("source_id").get<std::string>();
  auto s = parse_strategy(j.at("strategy").get<std::string>());
  if (!s) throw ValidationError("unknown strategy '" + j.at("strategy").get<std::string>() + "'");
  q.strategy = *s;
  q.date_cutoff = Date::parse(j.at("date_cutoff").get<std::string>());
  q.body_tokens = vec<std::string>(j, "body_tokens");
  if (j.contains("or_group")) q.or_group = j.at("or_group").get<std::vector<std::vector<std::string>>>();
  return q;
}

Json to_json(const ArticleDoc& a) {
  Json j;
  j["url"] = a.url;
  j["title"] = a.title;
  j["paragraphs"] = a.paragraphs;
  j["rank"] = a.retrieved_rank;
  j["fetch_date"] = a.fetch_date;
  return j;
}

ArticleDoc article_from_json(const Json& j) {
  ArticleDoc a;
  a.url = j.at("url").get<std::string>();
  a.title = j.value("title", std::string());
  a.paragraphs = vec<std::string>(j, "paragraphs");
  a.retrieved_rank = j.value("rank", 0);
  a.fetch_date = j.value("fetch_date", std::string());
  refresh_emptiness(a);
  return a;
}

Json to_json(const ScoredSentence& s) {
  Json j;
  j["text"] = s.text;
  j["tokens"] = s.tokens;
  j["score"] = s.final_score;
  j["raw_overlap"] = s.raw_overlap;
  j["source_url"] = s.source_url;
  j["article_rank"] = s.article_rank;
  j["position"] = s.position_in_article;
  return j;
}

ScoredSentence sentence_from_json(const Json& j) {
  ScoredSentence s;
  s.text = j.at("text").get<std::string>();
  s.tokens = j.contains("tokens") ? vec<std::string>(j, "tokens") : treebank_tokenize(s.text);
  s.final_score = j.at("score").get<double>();
  s.raw_overlap = j.value("raw_overlap", 0);
  s.source_url = j.value("source_url", std::string());
  s.article_rank = j.value("article_rank", 0);
  s.position_in_article = j.value("position", 0);
  return s;
}

}  // namespace rumour
