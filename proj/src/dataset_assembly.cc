#include "rumour/dataset_assembly.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "rumour/url.h"

namespace rumour {

namespace fs = std::filesystem;

namespace {

Json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw MalformedTweet(p.string(), "cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw MalformedTweet(p.string(), e.what());
  }
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (e.is_regular_file() && e.path().extension() == ".json" && name[0] != '.') out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool flag_set(const Json& j, const char* key) {
  if (!j.contains(key)) return false;
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>() != 0.0;
  if (v.is_string()) return v.get<std::string>() == "1" || to_lower(v.get<std::string>()) == "true";
  if (v.is_boolean()) return v.get<bool>();
  return false;
}

ThreadEntry load_thread(const fs::path& dir, Event event) {
  std::string thread_id = dir.filename().string();
  auto sources = json_files(dir / "source-tweets");
  if (sources.size() != 1)
    throw MalformedTweet((dir / "source-tweets").string(),
                         "expected one source tweet, found " + std::to_string(sources.size()));
  ThreadEntry t;
  t.event = event;
  t.source = tweet_from_twitter_json(read_json_file(sources[0]), event, sources[0].string());

  fs::path annotation = dir / "annotation.json";
  if (!fs::exists(annotation)) throw MissingAnnotation(thread_id);
  Json ann;
  try {
    std::ifstream in(annotation);
    ann = Json::parse(in);
  } catch (const Json::exception&) {
    throw MissingAnnotation(thread_id);
  }
  t.label = label_from_annotation(ann, thread_id);

  for (const auto& p : json_files(dir / "reactions")) {
    Json j = read_json_file(p);
    RawTweet r = tweet_from_twitter_json(j, event, p.string());
    if (r.id == t.source.id) continue;
    for (auto& u : tweet_urls(j)) t.reaction_urls.push_back(std::move(u));
    t.reactions.push_back(std::move(r));
  }
  return t;
}

void add_to(EventStats& s, Label label, std::size_t articles) {
  ++s.threads;
  ++s.labels[static_cast<std::size_t>(label)];
  s.articles += articles;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

Json tweet_json(const RawTweet& t) {
  Json j;
  j["id"] = t.id;
  j["text"] = t.text;
  j["created_at"] = t.created_at.iso();
  j["author_handle"] = t.author_handle;
  return j;
}

RawTweet tweet_from(const Json& j, Event event) {
  RawTweet t;
  t.id = j.at("id").get<std::string>();
  t.text = j.at("text").get<std::string>();
  t.created_at = Date::parse(j.at("created_at").get<std::string>());
  t.author_handle = j.value("author_handle", std::string());
  t.event = event;
  return t;
}

}  // namespace

RawTweet tweet_from_twitter_json(const Json& j, Event event, const std::string& file) {
  if (!j.is_object()) throw MalformedTweet(file, "not an object");
  RawTweet t;
  t.event = event;
  try {
    if (j.contains("id_str"))
      t.id = j.at("id_str").get<std::string>();
    else if (j.contains("id") && j.at("id").is_number_integer())
      t.id = std::to_string(j.at("id").get<std::int64_t>());
    else if (j.contains("id"))
      t.id = j.at("id").get<std::string>();
    else
      throw MalformedTweet(file, "missing id");
    if (j.contains("full_text"))
      t.text = j.at("full_text").get<std::string>();
    else if (j.contains("text"))
      t.text = j.at("text").get<std::string>();
    else
      throw MalformedTweet(file, "missing text");
    if (!j.contains("created_at")) throw MalformedTweet(file, "missing created_at");
    std::string created = j.at("created_at").get<std::string>();
    t.created_at = created.size() >= 10 && created[4] == '-' ? Date::parse(created) : Date::parse_twitter(created);
    if (j.contains("user") && j.at("user").is_object())
      t.author_handle = j.at("user").value("screen_name", std::string());
  } catch (const MalformedTweet&) {
    throw;
  } catch (const std::exception& e) {
    throw MalformedTweet(file, e.what());
  }
  return t;
}

std::vector<std::string> tweet_urls(const Json& j) {
  std::string text = j.contains("full_text") ? j.at("full_text").get<std::string>() : j.value("text", std::string());
  std::map<std::string, std::string> expanded;
  if (j.contains("entities") && j.at("entities").contains("urls")) {
    for (const auto& u : j.at("entities").at("urls")) {
      std::string shortened = u.contains("url") && u.at("url").is_string() ? u.at("url").get<std::string>() : "";
      std::string full = u.contains("expanded_url") && u.at("expanded_url").is_string()
                             ? u.at("expanded_url").get<std::string>()
                             : "";
      if (!shortened.empty() && !full.empty()) expanded[shortened] = full;
    }
  }
  std::vector<std::string> urls = extract_urls(text);
  for (auto& u : urls) {
    auto it = expanded.find(u);
    if (it != expanded.end()) u = it->second;
  }
  return urls;
}

Label label_from_annotation(const Json& j, const std::string& thread_id) {
  if (!j.is_object()) throw MissingAnnotation(thread_id);
  if (j.contains("veracity") && j.at("veracity").is_string()) {
    auto l = parse_label(j.at("veracity").get<std::string>());
    if (!l) throw MissingAnnotation(thread_id);
    return *l;
  }
  if (!j.contains("misinformation") && !j.contains("true")) throw MissingAnnotation(thread_id);
  bool mis = flag_set(j, "misinformation");
  bool tru = flag_set(j, "true");
  if (mis && tru) throw Error("thread '" + thread_id + "' is annotated both true and misinformation");
  if (mis) return Label::kFalse;
  if (tru) return Label::kTrue;
  return Label::kUnverified;
}

std::vector<ThreadEntry> load_corpus(const std::string& root) {
  if (!fs::is_directory(root)) throw ValidationError("corpus root '" + root + "' is not a directory");
  std::map<Event, std::vector<fs::path>> event_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    auto ev = parse_event(e.path().filename().string());
    if (ev) event_dirs[*ev].push_back(e.path());
  }
  std::vector<ThreadEntry> out;
  for (auto& [event, dirs] : event_dirs) {
    std::sort(dirs.begin(), dirs.end());
    std::vector<fs::path> threads;
    for (const auto& d : dirs) {
      fs::path base = fs::is_directory(d / "rumours") ? d / "rumours" : d;
      for (const auto& t : fs::directory_iterator(base))
        if (t.is_directory() && t.path().filename().string()[0] != '.') threads.push_back(t.path());
    }
    std::sort(threads.begin(), threads.end(), [](const fs::path& a, const fs::path& b) {
      auto x = a.filename().string(), y = b.filename().string();
      if (x.size() != y.size()) return x.size() < y.size();
      return x < y;
    });
    for (const auto& t : threads) out.push_back(load_thread(t, event));
  }
  compute_stats(out).check_cross_footing();
  return out;
}

void CorpusStats::check_cross_footing() const {
  EventStats sum;
  for (const auto& [event, s] : per_event) {
    std::size_t labels = s.labels[0] + s.labels[1] + s.labels[2];
    if (labels != s.threads)
      throw Error(std::string(event_name(event)) + ": label counts sum to " + std::to_string(labels) + ", not " +
                  std::to_string(s.threads));
    sum.threads += s.threads;
    for (std::size_t i = 0; i < 3; ++i) sum.labels[i] += s.labels[i];
    sum.articles += s.articles;
  }
  if (sum != total) throw Error("per-event counts do not sum to the corpus totals");
  if (total.labels[0] + total.labels[1] + total.labels[2] != total.threads)
    throw Error("total label counts do not sum to the thread total");
}

CorpusStats compute_stats(const std::vector<ThreadEntry>& threads) {
  CorpusStats s;
  for (const auto& t : threads) {
    add_to(s.per_event[t.event], t.label, 0);
    add_to(s.total, t.label, 0);
  }
  return s;
}

CorpusStats compute_stats(const std::vector<EnrichedEntry>& entries) {
  CorpusStats s;
  for (const auto& e : entries) {
    add_to(s.per_event[e.thread.event], e.thread.label, e.articles.size());
    add_to(s.total, e.thread.label, e.articles.size());
  }
  return s;
}

std::string format_stats(const CorpusStats& stats) {
  std::ostringstream out;
  out << pad("Event", 20) << pad("Threads", 9) << pad("True", 7) << pad("False", 7) << pad("Unv.", 7)
      << pad("Articles", 10) << '\n';
  auto row = [&](const std::string& name, const EventStats& s) {
    out << pad(name, 20) << pad(std::to_string(s.threads), 9) << pad(std::to_string(s.count(Label::kTrue)), 7)
        << pad(std::to_string(s.count(Label::kFalse)), 7) << pad(std::to_string(s.count(Label::kUnverified)), 7)
        << pad(std::to_string(s.articles), 10) << '\n';
  };
  for (const auto& [event, s] : stats.per_event) row(std::string(event_display_name(event)), s);
  row("Total", stats.total);
  return out.str();
}

AssemblyResult assemble(const std::vector<ThreadEntry>& threads, const EvidenceStore& evidence,
                        const AssemblyConfig& cfg, const TripleWordMap& triple_words) {
  cfg.selection.validate();
  AssemblyResult result;
  result.entries.resize(threads.size());

  auto build = [&](std::size_t i) {
    EnrichedEntry& e = result.entries[i];
    e.thread = threads[i];
    e.strategy_used = cfg.strategy;
    auto it = evidence.find(threads[i].id());
    if (it != evidence.end()) {
      for (const auto& a : it->second) {
        if (a.is_empty) continue;
        if (e.articles.size() >= cfg.max_articles) break;
        e.articles.push_back(a);
      }
    }
    if (e.articles.empty()) return;
    PreprocessedTweet rumour;
    try {
      rumour = preprocess(threads[i].source);
    } catch (const EmptyTweet&) {
      return;
    }
    e.selected_sentences = rank_sentences(rumour, e.articles, triple_words, cfg.selection);
    e.complete = e.selected_sentences.size() == cfg.selection.top_k;
  };

  std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, threads.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < threads.size(); ++i) build(i);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < threads.size(); i += workers) build(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  for (const auto& e : result.entries)
    if (e.complete) ++result.complete;
  return result;
}

std::string overlap_key(const std::string& url, const std::map<std::string, std::string>& expansions) {
  try {
    return normalize_url(url, expansions);
  } catch (const UnparseableUrl&) {
    return url;
  }
}

OverlapReport overlap_report(const std::vector<EnrichedEntry>& entries,
                             const std::map<std::string, std::string>& expansions,
                             const std::function<bool(const std::string&)>& page_is_empty) {
  std::map<std::string, std::size_t> web, thread, web_ne, thread_ne;
  std::map<std::string, bool> empty_cache;
  auto is_empty = [&](const std::string& url) {
    auto it = empty_cache.find(url);
    if (it != empty_cache.end()) return it->second;
    bool v = page_is_empty(url);
    empty_cache.emplace(url, v);
    return v;
  };
  for (const auto& e : entries) {
    for (const auto& a : e.articles) {
      auto key = overlap_key(a.url, expansions);
      ++web[key];
      if (!a.is_empty) ++web_ne[key];
    }
    for (const auto& u : e.thread.reaction_urls) {
      auto key = overlap_key(u, expansions);
      ++thread[key];
      if (page_is_empty && !is_empty(u)) ++thread_ne[key];
    }
  }
  auto counts = [](const std::map<std::string, std::size_t>& m) {
    SourceCounts c;
    for (const auto& [k, n] : m) c.overall += n;
    c.unique = m.size();
    return c;
  };
  auto overlap = [](const std::map<std::string, std::size_t>& a, const std::map<std::string, std::size_t>& b) {
    SourceCounts c;
    for (const auto& [k, n] : a) {
      auto it = b.find(k);
      if (it == b.end()) continue;
      c.overall += std::min(n, it->second);
      ++c.unique;
    }
    return c;
  };
  OverlapReport r;
  r.web = counts(web);
  r.thread = counts(thread);
  r.overlap = overlap(web, thread);
  if (page_is_empty) {
    r.has_not_empty = true;
    r.web_not_empty = counts(web_ne);
    r.thread_not_empty = counts(thread_ne);
    r.overlap_not_empty = overlap(web_ne, thread_ne);
  }
  return r;
}

std::string format_overlap(const OverlapReport& r) {
  std::ostringstream out;
  out << pad("", 12) << pad("Web", 10) << pad("Responses", 11) << pad("Overlap", 9) << '\n';
  auto row = [&](const std::string& name, std::size_t a, std::size_t b, std::size_t c) {
    out << pad(name, 12) << pad(std::to_string(a), 10) << pad(std::to_string(b), 11) << pad(std::to_string(c), 9)
        << '\n';
  };
  row("Overall", r.web.overall, r.thread.overall, r.overlap.overall);
  row("Unique", r.web.unique, r.thread.unique, r.overlap.unique);
  if (r.has_not_empty) {
    row("Not empty", r.web_not_empty.overall, r.thread_not_empty.overall, r.overlap_not_empty.overall);
    row("NE unique", r.web_not_empty.unique, r.thread_not_empty.unique, r.overlap_not_empty.unique);
  }
  return out.str();
}

Json to_json(const ThreadEntry& t) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["thread_id"] = t.id();
  j["event"] = std::string(event_name(t.event));
  j["label"] = std::string(label_name(t.label));
  j["source"] = tweet_json(t.source);
  Json reactions = Json::array();
  for (const auto& r : t.reactions) reactions.push_back(tweet_json(r));
  j["reactions"] = std::move(reactions);
  j["reaction_urls"] = t.reaction_urls;
  return j;
}

ThreadEntry thread_from_json(const Json& j) {
  if (!j.contains("schema_version")) throw ValidationError("record without schema_version");
  int v = j.at("schema_version").get<int>();
  if (v != kSchemaVersion) throw SchemaVersionMismatch(v, kSchemaVersion);
  ThreadEntry t;
  try {
    auto event = parse_event(j.at("event").get<std::string>());
    auto label = parse_label(j.at("label").get<std::string>());
    if (!event || !label) throw ValidationError("bad event or label in thread record");
    t.event = *event;
    t.label = *label;
    t.source = tweet_from(j.at("source"), *event);
    if (t.source.id != j.at("thread_id").get<std::string>())
      throw ValidationError("thread_id does not match source tweet id");
    for (const auto& r : j.at("reactions")) t.reactions.push_back(tweet_from(r, *event));
    t.reaction_urls = j.at("reaction_urls").get<std::vector<std::string>>();
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("malformed thread record: ") + ex.what());
  }
  return t;
}

Json to_json(const EnrichedEntry& e) {
  Json j = to_json(e.thread);
  j["strategy"] = std::string(strategy_name(e.strategy_used));
  j["complete"] = e.complete;
  Json articles = Json::array();
  for (const auto& a : e.articles) articles.push_back(to_json(a));
  j["articles"] = std::move(articles);
  Json sentences = Json::array();
  for (const auto& s : e.selected_sentences) sentences.push_back(to_json(s));
  j["selected_sentences"] = std::move(sentences);
  return j;
}

EnrichedEntry entry_from_json(const Json& j) {
  EnrichedEntry e;
  e.thread = thread_from_json(j);
  try {
    auto strategy = parse_strategy(j.value("strategy", std::string("preprocessed")));
    if (!strategy) throw ValidationError("unknown strategy in dataset record");
    e.strategy_used = *strategy;
    e.complete = j.at("complete").get<bool>();
    for (const auto& a : j.at("articles")) e.articles.push_back(article_from_json(a));
    for (const auto& s : j.at("selected_sentences")) e.selected_sentences.push_back(sentence_from_json(s));
  } catch (const Json::exception& ex) {
    throw ValidationError(std::string("malformed dataset record: ") + ex.what());
  }
  return e;
}

void write_dataset(std::ostream& out, const std::vector<EnrichedEntry>& entries, const FileHeader& header) {
  std::vector<Json> records;
  records.reserve(entries.size());
  for (const auto& e : entries) records.push_back(to_json(e));
  write_json_lines(out, header, records);
}

void write_dataset(const std::string& path, const std::vector<EnrichedEntry>& entries, const FileHeader& header) {
  std::vector<Json> records;
  records.reserve(entries.size());
  for (const auto& e : entries) records.push_back(to_json(e));
  write_json_lines(path, header, records);
}

std::vector<EnrichedEntry> read_dataset(std::istream& in) {
  auto lines = read_json_lines(in);
  std::vector<EnrichedEntry> out;
  out.reserve(lines.records.size());
  for (const auto& r : lines.records) out.push_back(entry_from_json(r));
  return out;
}

std::vector<EnrichedEntry> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_dataset(in);
}

}  // namespace rumour
