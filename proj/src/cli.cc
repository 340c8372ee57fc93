#include "rumour/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "rumour/dataset_assembly.h"
#include "rumour/eval_harness.h"
#include "rumour/json_io.h"
#include "rumour/parse_ingest.h"
#include "rumour/query_builder.h"
#include "rumour/relevance_metrics.h"
#include "rumour/retrieval.h"
#include "rumour/sentence_select.h"
#include "rumour/stopwords.h"
#include "rumour/text_prep.h"

namespace rumour {

namespace fs = std::filesystem;

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct TweetRecord {
  RawTweet tweet;
  PreprocessedTweet pre;
};

class Pipeline {
 public:
  Pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err)
      : cfg_(cfg), out_(out), err_(err), hash_(config_hash(cfg)) {}

  void preprocess_stage();
  void build_queries_stage();
  void search_stage();
  void score_retrieval_stage(bool compare);
  void select_sentences_stage();
  void assemble_stage();
  void stats_stage();
  void overlap_stage();
  void evaluate_stage();

 private:
  FileHeader header(const std::string& stage) const { return FileHeader{stage, hash_, cfg_.seed, kSchemaVersion}; }

  std::string input(const std::string& explicit_path, const std::string& name) const {
    return explicit_path.empty() ? (fs::path(cfg_.out_dir) / name).string() : explicit_path;
  }

  std::string output(const std::string& name) const {
    fs::create_directories(cfg_.out_dir);
    return (fs::path(cfg_.out_dir) / name).string();
  }

  void write_text(const std::string& name, const std::string& stage, const std::string& body) const {
    std::ofstream f(output(name), std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + output(name) + "'");
    f << "# " << stage << " config_hash=" << hash_ << " seed=" << cfg_.seed << '\n' << body;
  }

  std::vector<Strategy> strategies() const;
  Strategy single_strategy() const;
  SegmentationDictionary dictionary() const;
  SelectionConfig selection() const;
  std::vector<TweetRecord> load_preprocessed() const;
  std::vector<ThreadEntry> load_threads() const;
  // thread id -> (strategy -> articles)
  std::map<std::string, std::map<Strategy, std::vector<ArticleDoc>>> load_evidence() const;
  EvidenceStore evidence_for(Strategy s) const;
  TripleWordMap load_sentence_triples() const;
  std::unique_ptr<SearchBackend> make_backend() const;
  std::vector<EnrichedEntry> load_dataset() const;

  const RunConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::string hash_;
};

std::vector<Strategy> Pipeline::strategies() const {
  std::vector<Strategy> out;
  std::string spec = to_lower(cfg_.strategy);
  if (spec == "all") return {Strategy::kPreprocessed, Strategy::kDeprelShortened, Strategy::kTripleShortened};
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto s = parse_strategy(part);
    if (!s) throw ValidationError("unknown strategy '" + part + "' (preprocessed, deprel, triple or all)");
    if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
  }
  if (out.empty()) throw ValidationError("no strategy given");
  return out;
}

Strategy Pipeline::single_strategy() const {
  auto all = strategies();
  if (all.size() != 1) throw ValidationError("this stage needs exactly one --strategy");
  return all[0];
}

SegmentationDictionary Pipeline::dictionary() const {
  if (cfg_.dictionary.empty()) return SegmentationDictionary();
  return SegmentationDictionary::load(cfg_.dictionary);
}

SelectionConfig Pipeline::selection() const {
  SelectionConfig s;
  s.min_len = cfg_.min_len;
  s.max_len = cfg_.max_len;
  s.penalty_per_word = cfg_.penalty;
  s.top_k = cfg_.top_k;
  if (!cfg_.stopwords.empty()) s.stopwords = load_stopwords(cfg_.stopwords);
  s.validate();
  return s;
}

std::vector<TweetRecord> Pipeline::load_preprocessed() const {
  auto lines = read_json_lines(input(cfg_.preprocessed, "preprocessed.jsonl"));
  std::vector<TweetRecord> out;
  for (const auto& j : lines.records) {
    try {
      out.push_back({raw_tweet_from_json(j.at("tweet"), Event::kCharlieHebdo),
                     preprocessed_from_json(j.at("preprocessed"))});
    } catch (const Json::exception& e) {
      throw ValidationError(std::string("malformed preprocessed record: ") + e.what());
    }
  }
  return out;
}

std::vector<ThreadEntry> Pipeline::load_threads() const {
  auto lines = read_json_lines(input(cfg_.threads, "threads.jsonl"));
  std::vector<ThreadEntry> out;
  for (const auto& j : lines.records) out.push_back(thread_from_json(j));
  return out;
}

std::map<std::string, std::map<Strategy, std::vector<ArticleDoc>>> Pipeline::load_evidence() const {
  auto lines = read_json_lines(input(cfg_.evidence, "evidence.jsonl"));
  std::map<std::string, std::map<Strategy, std::vector<ArticleDoc>>> out;
  for (const auto& j : lines.records) {
    try {
      auto s = parse_strategy(j.at("strategy").get<std::string>());
      if (!s) throw ValidationError("unknown strategy in evidence file");
      auto& articles = out[j.at("thread_id").get<std::string>()][*s];
      for (const auto& a : j.at("articles")) articles.push_back(article_from_json(a));
    } catch (const Json::exception& e) {
      throw ValidationError(std::string("malformed evidence record: ") + e.what());
    }
  }
  return out;
}

EvidenceStore Pipeline::evidence_for(Strategy s) const {
  EvidenceStore store;
  for (auto& [id, by_strategy] : load_evidence()) {
    auto it = by_strategy.find(s);
    if (it != by_strategy.end()) store[id] = std::move(it->second);
  }
  return store;
}

TripleWordMap Pipeline::load_sentence_triples() const {
  TripleWordMap out;
  if (cfg_.sentence_triples.empty()) return out;
  std::ifstream in(cfg_.sentence_triples);
  if (!in) throw ValidationError("cannot open '" + cfg_.sentence_triples + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ValidationError("sentence triple line without a tab: " + line);
    auto& words = out[line.substr(0, tab)];
    for (auto& w : split_ws(std::string_view(line).substr(tab + 1))) words.push_back(std::move(w));
  }
  return out;
}

std::unique_ptr<SearchBackend> Pipeline::make_backend() const {
  const std::string& spec = cfg_.backend;
  if (spec.rfind("offline:", 0) == 0) {
    auto index = std::make_shared<const OfflineCorpusIndex>(OfflineCorpusIndex::load(spec.substr(8)));
    return std::make_unique<OfflineBackend>(index);
  }
  if (spec == "live") {
    auto c = LiveBackendConfig::from_environment();
    if (c.endpoint.empty()) throw ValidationError("live backend needs RUMOUR_SEARCH_ENDPOINT");
    c.requests_per_second = cfg_.rate_limit;
    return std::make_unique<LiveBackend>(c);
  }
  throw ValidationError("--backend must be 'live' or 'offline:<corpus.jsonl>'");
}

std::vector<EnrichedEntry> Pipeline::load_dataset() const {
  return read_dataset(input(cfg_.dataset, "dataset.jsonl"));
}

void Pipeline::preprocess_stage() {
  std::vector<RawTweet> tweets;
  if (!cfg_.corpus.empty()) {
    auto threads = load_corpus(cfg_.corpus);
    std::vector<Json> records;
    for (const auto& t : threads) {
      records.push_back(to_json(t));
      tweets.push_back(t.source);
    }
    write_json_lines(output("threads.jsonl"), header("threads"), records);
  } else if (!cfg_.tweets.empty()) {
    for (const auto& j : read_json_lines(cfg_.tweets).records) tweets.push_back(raw_tweet_from_json(j, Event::kCharlieHebdo));
  } else {
    throw ValidationError("preprocess needs --corpus or --tweets");
  }
  std::vector<Json> records;
  std::size_t skipped = 0;
  for (const auto& t : tweets) {
    try {
      PreprocessedTweet p = preprocess(t);
      Json j;
      j["tweet"] = to_json(t);
      j["preprocessed"] = to_json(p);
      records.push_back(std::move(j));
    } catch (const EmptyTweet& e) {
      err_ << "warning: " << e.what() << '\n';
      ++skipped;
    }
  }
  write_json_lines(output("preprocessed.jsonl"), header("preprocess"), records);
  out_ << "preprocessed " << records.size() << " tweets";
  if (skipped) out_ << " (" << skipped << " empty after cleaning)";
  out_ << '\n';
}

void Pipeline::build_queries_stage() {
  auto wanted = strategies();
  auto tweets = load_preprocessed();
  ParseMap parses;
  TripleMap triples;
  bool need_parse = std::find(wanted.begin(), wanted.end(), Strategy::kDeprelShortened) != wanted.end() ||
                    (std::find(wanted.begin(), wanted.end(), Strategy::kTripleShortened) != wanted.end() &&
                     cfg_.triples.empty());
  if (need_parse && cfg_.parses.empty()) throw ValidationError("shortened strategies need --parses");
  if (!cfg_.parses.empty()) parses = read_parses(cfg_.parses);
  if (!cfg_.triples.empty()) triples = read_triples(cfg_.triples, parses);
  auto dict = dictionary();

  std::vector<Json> records;
  for (const auto& t : tweets) {
    auto p = parses.find(t.pre.source_id);
    auto tr = triples.find(t.pre.source_id);
    for (Strategy s : wanted) {
      try {
        Query q = build_query(t.pre, p == parses.end() ? nullptr : &p->second,
                              tr == triples.end() ? nullptr : &tr->second, s, dict);
        out_ << render(q) << '\n';
        records.push_back(to_json(q));
      } catch (const EmptyQueryBody& e) {
        err_ << "warning: " << e.what() << '\n';
      } catch (const ValidationError& e) {
        err_ << "warning: tweet " << t.pre.source_id << ": " << e.what() << '\n';
      }
    }
  }
  write_json_lines(output("queries.jsonl"), header("build-queries"), records);
}

void Pipeline::search_stage() {
  if (cfg_.max_results == 0 || cfg_.passes == 0) throw ValidationError("--max-results and --passes must be positive");
  auto lines = read_json_lines(input(cfg_.queries, "queries.jsonl"));
  auto backend = make_backend();
  std::size_t per_pass = (cfg_.max_results + cfg_.passes - 1) / cfg_.passes;
  std::vector<Json> records;
  std::size_t total = 0;
  for (const auto& j : lines.records) {
    Query q = query_from_json(j);
    auto articles = collect_evidence(q, *backend, cfg_.passes, per_pass);
    if (articles.size() > cfg_.max_results) articles.resize(cfg_.max_results);
    total += articles.size();
    Json r;
    r["thread_id"] = q.source_id;
    r["strategy"] = std::string(strategy_name(q.strategy));
    r["query"] = render(q);
    Json arr = Json::array();
    for (const auto& a : articles) arr.push_back(to_json(a));
    r["articles"] = std::move(arr);
    records.push_back(std::move(r));
  }
  write_json_lines(output("evidence.jsonl"), header("search"), records);
  out_ << "retrieved " << total << " articles for " << records.size() << " queries\n";
}

void Pipeline::score_retrieval_stage(bool compare) {
  std::string url_path = cfg_.url_embeddings.empty() ? cfg_.embeddings : cfg_.url_embeddings;
  std::string para_path = cfg_.paragraph_embeddings.empty() ? cfg_.embeddings : cfg_.paragraph_embeddings;
  if (url_path.empty() || para_path.empty())
    throw ValidationError("retrieval scoring needs --embeddings (or --url-embeddings and --paragraph-embeddings)");
  EmbeddingStore url_store = EmbeddingStore::load(url_path);
  EmbeddingStore para_store = para_path == url_path ? url_store : EmbeddingStore::load(para_path);
  auto dict = dictionary();
  std::unique_ptr<ExternalScorer> external;
  if (!cfg_.scorer.empty()) external = std::make_unique<ExternalScorer>(cfg_.scorer);

  std::map<std::string, RumourContext> rumours;
  for (auto& t : load_preprocessed()) rumours[t.pre.source_id].tweet = std::move(t.pre);
  std::string threads_path = input(cfg_.threads, "threads.jsonl");
  if (fs::exists(threads_path)) {
    for (auto& t : load_threads()) {
      auto it = rumours.find(t.id());
      if (it != rumours.end()) it->second.response_urls = std::move(t.reaction_urls);
    }
  }

  std::map<Strategy, StrategyEvidence> grouped;
  for (auto& [id, by_strategy] : load_evidence()) {
    for (auto& [s, articles] : by_strategy) {
      grouped[s].strategy = s;
      grouped[s].articles[id] = std::move(articles);
    }
  }
  std::vector<StrategyEvidence> evidence;
  for (Strategy s : strategies())
    if (grouped.count(s)) evidence.push_back(std::move(grouped[s]));
  if (evidence.empty()) throw ValidationError("evidence file holds none of the requested strategies");

  MetricResources res{&url_store, &para_store, &dict, external.get()};
  StrategyComparison cmp = compare_strategies(evidence, rumours, res);

  std::vector<Json> records;
  std::ostringstream table;
  table << "strategy        url_words  paragraph" << (external ? "   external" : "") << "  articles\n";
  for (const auto& r : cmp.rows) {
    Json j;
    j["kind"] = "metrics";
    j["strategy"] = std::string(strategy_name(r.strategy));
    j["url_words"] = r.url_words_score;
    j["paragraph_embedding"] = r.paragraph_embed_score;
    if (r.external_score) j["external"] = *r.external_score;
    j["n_articles"] = r.n_articles;
    j["url_pairs"] = r.url_pairs;
    j["paragraph_articles"] = r.paragraph_articles;
    records.push_back(std::move(j));
    std::string name(strategy_name(r.strategy));
    table << name << std::string(name.size() < 14 ? 14 - name.size() : 1, ' ') << "  " << fixed(r.url_words_score, 4)
          << "     " << fixed(r.paragraph_embed_score, 4);
    if (r.external_score) table << "     " << fixed(*r.external_score, 4);
    table << "  " << r.n_articles << '\n';
  }
  if (compare) {
    Json j;
    j["kind"] = "order";
    for (const auto& [m, order] : cmp.order) {
      Json arr = Json::array();
      for (Strategy s : order) arr.push_back(std::string(strategy_name(s)));
      j[std::string(metric_name(m))] = std::move(arr);
    }
    j["consistent"] = cmp.consistent_order;
    records.push_back(std::move(j));
    table << "order " << (cmp.consistent_order ? "agrees" : "differs") << " across metrics\n";
  }
  write_json_lines(output(compare ? "comparison.jsonl" : "retrieval_scores.jsonl"),
                   header(compare ? "compare-strategies" : "score-retrieval"), records);
  out_ << table.str();
}

void Pipeline::select_sentences_stage() {
  Strategy s = single_strategy();
  auto cfg = selection();
  auto store = evidence_for(s);
  auto triple_words = load_sentence_triples();
  std::vector<Json> records;
  std::size_t complete = 0;
  for (const auto& t : load_preprocessed()) {
    auto it = store.find(t.pre.source_id);
    std::vector<ArticleDoc> articles;
    if (it != store.end())
      for (const auto& a : it->second)
        if (!a.is_empty) articles.push_back(a);
    auto ranked = rank_sentences(t.pre, articles, triple_words, cfg);
    bool full = ranked.size() == cfg.top_k;
    if (full) ++complete;
    Json j;
    j["thread_id"] = t.pre.source_id;
    j["strategy"] = std::string(strategy_name(s));
    j["complete"] = full;
    Json arr = Json::array();
    for (const auto& r : ranked) arr.push_back(to_json(r));
    j["sentences"] = std::move(arr);
    records.push_back(std::move(j));
  }
  write_json_lines(output("sentences.jsonl"), header("select-sentences"), records);
  out_ << "selected sentences for " << records.size() << " rumours, " << complete << " with a full set of "
       << cfg.top_k << '\n';
}

void Pipeline::assemble_stage() {
  AssemblyConfig acfg;
  acfg.selection = selection();
  acfg.strategy = single_strategy();
  acfg.max_articles = cfg_.max_results;
  acfg.workers = std::max<std::size_t>(1, cfg_.workers);
  auto threads = load_threads();
  auto result = assemble(threads, evidence_for(acfg.strategy), acfg, load_sentence_triples());

  std::string sentences_path = input(cfg_.sentences, "sentences.jsonl");
  if (!cfg_.sentences.empty() || fs::exists(sentences_path)) {
    std::map<std::string, std::vector<ScoredSentence>> chosen;
    for (const auto& j : read_json_lines(sentences_path).records) {
      if (j.value("strategy", std::string()) != strategy_name(acfg.strategy)) continue;
      auto& v = chosen[j.at("thread_id").get<std::string>()];
      for (const auto& s : j.at("sentences")) v.push_back(sentence_from_json(s));
    }
    result.complete = 0;
    for (auto& e : result.entries) {
      auto it = chosen.find(e.thread.id());
      if (it != chosen.end()) {
        e.selected_sentences = it->second;
        e.complete = e.selected_sentences.size() == acfg.selection.top_k;
      }
      if (e.complete) ++result.complete;
    }
  }
  write_dataset(output("dataset.jsonl"), result.entries, header("assemble"));
  out_ << "assembled " << result.entries.size() << " threads, " << result.complete << " complete ("
       << fixed(100.0 * result.completeness_ratio(), 1) << "%)\n";
}

void Pipeline::stats_stage() {
  CorpusStats stats;
  std::string dataset_path = input(cfg_.dataset, "dataset.jsonl");
  if (!cfg_.corpus.empty() && cfg_.dataset.empty())
    stats = compute_stats(load_corpus(cfg_.corpus));
  else
    stats = compute_stats(read_dataset(dataset_path));
  stats.check_cross_footing();
  std::vector<Json> records;
  auto row = [](const std::string& name, const EventStats& s) {
    Json j;
    j["event"] = name;
    j["threads"] = s.threads;
    j["true"] = s.count(Label::kTrue);
    j["false"] = s.count(Label::kFalse);
    j["unverified"] = s.count(Label::kUnverified);
    j["articles"] = s.articles;
    return j;
  };
  for (const auto& [e, s] : stats.per_event) records.push_back(row(std::string(event_name(e)), s));
  records.push_back(row("total", stats.total));
  write_json_lines(output("stats.jsonl"), header("stats"), records);
  out_ << format_stats(stats);
}

void Pipeline::overlap_stage() {
  auto entries = load_dataset();
  std::map<std::string, std::string> expansions;
  if (!cfg_.expansions.empty()) {
    std::ifstream in(cfg_.expansions);
    if (!in) throw ValidationError("cannot open '" + cfg_.expansions + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto tab = line.find('\t');
      if (line.empty() || line[0] == '#' || tab == std::string::npos) continue;
      expansions[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }
  std::function<bool(const std::string&)> page_is_empty;
  std::unique_ptr<SearchBackend> backend;
  if (cfg_.check_responses) {
    backend = make_backend();
    std::string name = backend->capabilities().name;
    page_is_empty = [&backend, name](const std::string& url) {
      try {
        return backend->fetch(SearchResult{url, 0, name}).is_empty;
      } catch (const Error&) {
        return true;
      }
    };
  }
  OverlapReport r = overlap_report(entries, expansions, page_is_empty);
  Json j;
  auto put = [&j](const std::string& key, const SourceCounts& c) {
    j[key] = {{"overall", c.overall}, {"unique", c.unique}};
  };
  put("web", r.web);
  put("thread", r.thread);
  put("overlap", r.overlap);
  if (r.has_not_empty) {
    put("web_not_empty", r.web_not_empty);
    put("thread_not_empty", r.thread_not_empty);
    put("overlap_not_empty", r.overlap_not_empty);
  }
  write_json_lines(output("overlap.jsonl"), header("overlap"), {j});
  out_ << format_overlap(r);
}

void Pipeline::evaluate_stage() {
  auto entries = load_dataset();
  auto folds = make_folds(entries, !cfg_.no_quota);
  std::vector<PredictionRecord> predictions;
  if (cfg_.predictions == "baseline") {
    auto scenario = parse_scenario(cfg_.scenario);
    if (!scenario) throw ValidationError("unknown scenario '" + cfg_.scenario + "'");
    predictions = run_baseline(entries, folds, *scenario);
    write_predictions(output("predictions.jsonl"), predictions, header("evaluate"));
  } else {
    predictions = read_predictions(cfg_.predictions);
    for (const auto& p : predictions)
      if (p.pair_index >= static_cast<int>(cfg_.top_k))
        throw ValidationError("pair_index " + std::to_string(p.pair_index) + " out of range for thread '" +
                              p.thread_id + "'");
  }
  EvalReport report = evaluate(entries, folds, predictions);
  std::string row = cfg_.predictions == "baseline" ? "Baseline " + cfg_.scenario : "Predictions";
  std::string table = format_report(report, row);
  write_text("report.txt", "evaluate", table);
  write_json_lines(output("report.jsonl"), header("evaluate"), {report_json(report)});
  out_ << table;
}

}  // namespace

std::string canonical_config(const RunConfig& c) {
  std::ostringstream s;
  s << "backend=" << c.backend << '\n'
    << "check_responses=" << c.check_responses << '\n'
    << "corpus=" << c.corpus << '\n'
    << "dataset=" << c.dataset << '\n'
    << "dictionary=" << c.dictionary << '\n'
    << "embeddings=" << c.embeddings << '\n'
    << "evidence=" << c.evidence << '\n'
    << "expansions=" << c.expansions << '\n'
    << "max_len=" << c.max_len << '\n'
    << "max_results=" << c.max_results << '\n'
    << "min_len=" << c.min_len << '\n'
    << "no_quota=" << c.no_quota << '\n'
    << "paragraph_embeddings=" << c.paragraph_embeddings << '\n'
    << "parses=" << c.parses << '\n'
    << "passes=" << c.passes << '\n'
    << "penalty=" << format_real(c.penalty) << '\n'
    << "predictions=" << c.predictions << '\n'
    << "preprocessed=" << c.preprocessed << '\n'
    << "queries=" << c.queries << '\n'
    << "rate_limit=" << format_real(c.rate_limit) << '\n'
    << "scenario=" << c.scenario << '\n'
    << "scorer=" << c.scorer << '\n'
    << "seed=" << c.seed << '\n'
    << "sentence_triples=" << c.sentence_triples << '\n'
    << "sentences=" << c.sentences << '\n'
    << "stopwords=" << c.stopwords << '\n'
    << "strategy=" << c.strategy << '\n'
    << "threads=" << c.threads << '\n'
    << "top_k=" << c.top_k << '\n'
    << "triples=" << c.triples << '\n'
    << "tweets=" << c.tweets << '\n'
    << "url_embeddings=" << c.url_embeddings << '\n'
    << "workers=" << c.workers << '\n';
  return s.str();
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(canonical_config(cfg))); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Rumour evidence retrieval and evaluation toolkit", "rumour"};
  app.set_config("--config", "", "TOML-style key = value file; command-line flags win");
  app.fallthrough();
  app.require_subcommand(1, 1);

  app.add_option("--out", cfg.out_dir, "Output directory (also the default location of stage inputs)");
  app.add_option("--corpus", cfg.corpus, "Base corpus root (per-event, per-thread folders)");
  app.add_option("--tweets", cfg.tweets, "Tweets as JSON Lines (id, text, created_at, event)");
  app.add_option("--preprocessed", cfg.preprocessed, "Preprocessed tweets file");
  app.add_option("--threads", cfg.threads, "Threads file written by preprocess --corpus");
  app.add_option("--queries", cfg.queries, "Queries file");
  app.add_option("--evidence", cfg.evidence, "Evidence file written by search");
  app.add_option("--sentences", cfg.sentences, "Selected sentences file");
  app.add_option("--dataset", cfg.dataset, "Assembled dataset file");
  app.add_option("--predictions", cfg.predictions, "Prediction records file, or 'baseline'");
  app.add_option("--parses", cfg.parses, "CoNLL-U parses of the tweets");
  app.add_option("--triples", cfg.triples, "Tab-separated (id, subject, predicate, object) triples");
  app.add_option("--sentence-triples", cfg.sentence_triples, "Triple words per evidence sentence (key TAB words)");
  app.add_option("--dict", cfg.dictionary, "Word frequency dictionary for segmentation");
  app.add_option("--stopwords", cfg.stopwords, "Stopword list, one per line");
  app.add_option("--embeddings", cfg.embeddings, "Word vectors used by both embedding metrics");
  app.add_option("--url-embeddings", cfg.url_embeddings, "Word vectors for the URL words metric");
  app.add_option("--paragraph-embeddings", cfg.paragraph_embeddings, "Word vectors for the paragraph metric");
  app.add_option("--scorer", cfg.scorer, "External pair scorer command or unix:/socket");
  app.add_option("--expansions", cfg.expansions, "Short URL expansions (short TAB long)");
  app.add_option("--strategy", cfg.strategy, "preprocessed | deprel | triple | all (comma list allowed)");
  app.add_option("--backend", cfg.backend, "live | offline:<corpus.jsonl>");
  app.add_option("--max-results", cfg.max_results, "Articles kept per rumour");
  app.add_option("--passes", cfg.passes, "Query passes per rumour");
  app.add_option("--rate-limit", cfg.rate_limit, "Live requests per second per host");
  app.add_option("--min-len", cfg.min_len, "Shortest evidence sentence in tokens");
  app.add_option("--max-len", cfg.max_len, "Longest unpenalised evidence sentence in tokens");
  app.add_option("--penalty", cfg.penalty, "Score fraction lost per token beyond --max-len");
  app.add_option("--top-k", cfg.top_k, "Evidence sentences per rumour");
  app.add_option("--scenario", cfg.scenario, "rumour | evidence | rumour+evidence");
  app.add_flag("--no-quota", cfg.no_quota, "Keep rumours without a full sentence set");
  app.add_flag("--check-responses", cfg.check_responses, "Fetch response URLs for the not-empty overlap counts");
  app.add_option("--workers", cfg.workers, "Worker threads for assembly");
  app.add_option("--seed", cfg.seed, "Seed recorded in every output");

  struct Stage {
    const char* name;
    const char* help;
  };
  const Stage stages[] = {
      {"preprocess", "Clean source tweets"},
      {"build-queries", "Turn preprocessed tweets into search queries"},
      {"search", "Retrieve evidence articles for each query"},
      {"score-retrieval", "Score retrieved evidence with the relevance metrics"},
      {"compare-strategies", "Rank query strategies under every metric"},
      {"select-sentences", "Pick the top evidence sentences per rumour"},
      {"assemble", "Join threads, evidence and sentences into the dataset"},
      {"stats", "Per-event thread, label and article counts"},
      {"overlap", "Overlap between retrieved and response URLs"},
      {"evaluate", "Leave-one-event-out evaluation"},
  };
  std::map<CLI::App*, std::string> names;
  for (const auto& s : stages) names[app.add_subcommand(s.name, s.help)] = s.name;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  std::string stage;
  for (const auto& [sub, name] : names)
    if (sub->parsed()) stage = name;

  try {
    Pipeline p(cfg, out, err);
    if (stage == "preprocess") p.preprocess_stage();
    else if (stage == "build-queries") p.build_queries_stage();
    else if (stage == "search") p.search_stage();
    else if (stage == "score-retrieval") p.score_retrieval_stage(false);
    else if (stage == "compare-strategies") p.score_retrieval_stage(true);
    else if (stage == "select-sentences") p.select_sentences_stage();
    else if (stage == "assemble") p.assemble_stage();
    else if (stage == "stats") p.stats_stage();
    else if (stage == "overlap") p.overlap_stage();
    else if (stage == "evaluate") p.evaluate_stage();
  } catch (const ValidationError& e) {
    err << stage << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << stage << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("rumour");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace rumour
