// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// With arguments, runs only the named criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rumour/dataset_assembly.h"
#include "rumour/eval_harness.h"
#include "rumour/query_builder.h"
#include "rumour/relevance_metrics.h"
#include "rumour/retrieval.h"
#include "rumour/sentence_select.h"
#include "test_support.h"

namespace rumour {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ < 5) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string& summary) const {
    if (!failures_) return {true, summary};
    return {false, detail_ + (failures_ > 5 ? " (+" + std::to_string(failures_ - 5) + " more)" : "")};
  }

 private:
  int failures_ = 0;
  std::string detail_;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << std::fixed << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome charlie_hebdo_queries() {
  const std::vector<std::string> want = {
      "before:2015-01-09 MORE : Massacre suspects believed to have taken hostage and holed up in small industrial "
      "town northeast of Paris :",
      "before:2015-01-09 (Charlie Hebdo) Massacre suspects small industrial town northeast",
      "before:2015-01-09 (Charlie Hebdo) Massacre suspects believed to have taken hostage holed up in small "
      "industrial town northeast of Paris",
  };
  auto t0 = Clock::now();
  testing::TempDir dir;
  Check c;
  std::string out, err;
  int rc = testing::cli({"preprocess", "--tweets", testing::fixture("charlie_hebdo_tweets.jsonl"), "--out", dir.str()},
                        nullptr, &err);
  c.expect(rc == 0, "preprocess exited " + std::to_string(rc) + ": " + err);
  rc = testing::cli({"build-queries", "--strategy", "all", "--parses", testing::fixture("charlie_hebdo.conllu"), "--triples",
                     testing::fixture("charlie_hebdo_triples.tsv"), "--dict", testing::fixture("dict.tsv"), "--out",
                     dir.str()},
                    &out, &err);
  c.expect(rc == 0, "build-queries exited " + std::to_string(rc) + ": " + err);
  std::vector<std::string> got;
  std::istringstream lines(out);
  for (std::string line; std::getline(lines, line);) got.push_back(line);
  c.expect(got.size() == want.size(), std::to_string(got.size()) + " queries printed");
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i)
    c.expect(got[i] == want[i], "got \"" + got[i] + "\"");
  double secs = seconds_since(t0);
  c.expect(secs < 1.0, "took " + fmt(secs, 2) + " s");
  return c.done("3 strategies byte-exact in " + fmt(secs, 3) + " s");
}

Outcome macro_triple(std::array<double, 3> f1, double published) {
  double m = macro_average(f1);
  std::string d = "mean(" + fmt(f1[0], 3) + ", " + fmt(f1[1], 3) + ", " + fmt(f1[2], 3) + ") = " + fmt(m, 5) +
                  ", published " + fmt(published, 3);
  return {std::abs(m - published) <= 0.0005, d};
}

// Thread and article counts per event, labels indexed by Label.
struct CorpusRow {
  Event event;
  std::array<std::size_t, 3> labels;
  std::size_t threads;
  std::size_t articles;
};

const std::vector<CorpusRow>& corpus_counts() {
  static const std::vector<CorpusRow> rows = {
      {Event::kCharlieHebdo, {116, 193, 149}, 458, 3941},
      {Event::kSydneySiege, {86, 382, 54}, 522, 4436},
      {Event::kFerguson, {8, 10, 266}, 284, 2473},
      {Event::kOttawaShooting, {72, 329, 69}, 470, 4020},
      {Event::kGermanwingsCrash, {111, 94, 33}, 238, 2057},
  };
  return rows;
}

void expect_corpus_counts(Check& c, const CorpusStats& s, bool articles, const std::string& where) {
  try {
    s.check_cross_footing();
  } catch (const Error& e) {
    c.expect(false, where + ": " + e.what());
  }
  for (const auto& row : corpus_counts()) {
    auto it = s.per_event.find(row.event);
    if (it == s.per_event.end()) {
      c.expect(false, where + ": no " + std::string(event_name(row.event)));
      continue;
    }
    c.expect(it->second.threads == row.threads, where + ": " + std::string(event_name(row.event)) + " threads " +
                                                    std::to_string(it->second.threads));
    c.expect(it->second.labels == row.labels, where + ": " + std::string(event_name(row.event)) + " label counts differ");
    if (articles)
      c.expect(it->second.articles == row.articles, where + ": " + std::string(event_name(row.event)) + " articles " +
                                                        std::to_string(it->second.articles));
  }
  c.expect(s.total.threads == 1972, where + ": total threads " + std::to_string(s.total.threads));
  c.expect(s.total.labels == std::array<std::size_t, 3>{393, 1008, 571}, where + ": total labels differ");
  if (articles) c.expect(s.total.articles == 16927, where + ": total articles " + std::to_string(s.total.articles));
}

Outcome corpus_cross_footing() {
  Check c;
  std::size_t sum = 0;
  for (const auto& row : corpus_counts()) sum += row.threads;
  c.expect(sum == 1972, "row sums give " + std::to_string(sum));

  testing::TempDir dir;
  std::map<Event, std::array<std::size_t, 3>> counts;
  for (const auto& row : corpus_counts()) counts[row.event] = row.labels;
  testing::write_layout_corpus(dir.path(), counts);
  auto threads = load_corpus(dir.str());
  expect_corpus_counts(c, compute_stats(threads), false, "layout corpus");

  // Spread each event's article total over its threads.
  std::map<Event, std::size_t> seen, given;
  std::map<Event, const CorpusRow*> rows;
  for (const auto& row : corpus_counts()) rows[row.event] = &row;
  std::vector<EnrichedEntry> entries;
  for (const auto& t : threads) {
    const auto& row = *rows.at(t.event);
    std::size_t i = seen[t.event]++;
    std::size_t n = row.articles / row.threads + (i < row.articles % row.threads ? 1 : 0);
    EnrichedEntry e;
    e.thread = t;
    for (std::size_t a = 0; a < n; ++a) {
      ArticleDoc d;
      d.url = "http://news.example/" + t.id() + "/" + std::to_string(a);
      d.title = "Title";
      d.paragraphs = {"Body text."};
      d.retrieved_rank = static_cast<int>(a) + 1;
      refresh_emptiness(d);
      e.articles.push_back(d);
    }
    entries.push_back(std::move(e));
  }
  expect_corpus_counts(c, compute_stats(entries), true, "assembled entries");

  std::string summary = "1972 threads (393 F / 1008 T / 571 U), 16927 articles";
  if (const char* real = std::getenv("RUMOUR_PHEME_ROOT"); real && *real) {
    try {
      expect_corpus_counts(c, compute_stats(load_corpus(real)), false, "corpus at " + std::string(real));
      summary += "; real corpus matches";
    } catch (const Error& e) {
      c.expect(false, std::string("real corpus: ") + e.what());
    }
  } else {
    summary += "; RUMOUR_PHEME_ROOT unset, real corpus not checked";
  }
  return c.done(summary);
}

Outcome metric_ordering() {
  auto t0 = Clock::now();
  Check c;
  auto planted = testing::planted_metrics();
  auto store = EmbeddingStore::load(testing::fixture("embeddings.txt"));
  auto dict = SegmentationDictionary::load(testing::fixture("dict.tsv"));
  ExternalScorer scorer(SCORER_STUB);
  MetricResources res{&store, &store, &dict, &scorer};
  auto cmp = compare_strategies({planted.decoy, planted.relevant}, planted.rumours, res);
  c.expect(cmp.rows.size() == 2, std::to_string(cmp.rows.size()) + " rows");
  if (cmp.rows.size() == 2) {
    const auto& b = cmp.rows[0];
    const auto& a = cmp.rows[1];
    c.expect(a.url_words_score > b.url_words_score,
             "url words " + fmt(a.url_words_score) + " vs " + fmt(b.url_words_score));
    c.expect(a.paragraph_embed_score > b.paragraph_embed_score,
             "paragraph " + fmt(a.paragraph_embed_score) + " vs " + fmt(b.paragraph_embed_score));
    c.expect(a.external_score && b.external_score && *a.external_score > *b.external_score, "external scorer");
  }
  for (auto m : {Metric::kUrlWords, Metric::kParagraphEmbedding, Metric::kExternal}) {
    auto it = cmp.order.find(m);
    c.expect(it != cmp.order.end() && !it->second.empty() && it->second.front() == Strategy::kPreprocessed,
             std::string(metric_name(m)) + " does not rank the planted strategy first");
  }
  c.expect(cmp.consistent_order, "order differs across metrics");
  double secs = seconds_since(t0);
  c.expect(secs < 10.0, "took " + fmt(secs, 2) + " s");
  return c.done("planted strategy first under all 3 metrics, same order, " + fmt(secs, 3) + " s");
}

Outcome sentence_selection_oracle() {
  Check c;
  c.expect(std::abs(penalised_score(10, 22, SelectionConfig{}) - 9.6) < 1e-12, "22 tokens, raw 10 is not 9.6");
  std::mt19937_64 rng(20150109);
  std::size_t sentences = 0;
  for (int round = 0; round < 20; ++round) {
    auto f = testing::random_selection_fixture(rng, 200);
    sentences += f.sentences;
    SelectionConfig cfg;
    cfg.top_k = 1 + rng() % 10;
    auto got = rank_sentences(f.rumour, f.articles, {}, cfg);
    auto want = testing::brute_force_selection(f.rumour.tokens, f.articles, cfg);
    std::string r = "fixture " + std::to_string(round);
    c.expect(got.size() == want.size(), r + ": sizes differ");
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
      c.expect(got[i].source_url == want[i].source_url && got[i].position_in_article == want[i].position_in_article,
               r + ": position " + std::to_string(i) + " differs");
      c.expect(got[i].raw_overlap == want[i].raw_overlap && got[i].final_score == want[i].final_score,
               r + ": score " + std::to_string(i) + " differs");
    }
  }
  return c.done("20 fixtures (" + std::to_string(sentences) + " sentences) equal the exhaustive ranking; 9.6 spot check");
}

Outcome bm25_oracle() {
  Check c;
  std::mt19937_64 rng(1972);
  const std::vector<std::string> vocab = {"siege", "paris", "hostage", "police", "gunman", "cafe", "sydney",
                                          "crash", "pilot", "ottawa", "ferguson", "shot", "the", "a", "news"};
  double worst = 0.0;
  std::size_t hits = 0;
  for (int round = 0; round < 10; ++round) {
    auto docs = testing::random_corpus(rng, 50, vocab);
    OfflineCorpusIndex idx(docs);
    Query q;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 4); k < n; ++k) q.body_tokens.push_back(testing::random_word(rng, vocab));
    q.date_cutoff = Date{2014, 1 + static_cast<unsigned>(rng() % 12), 1 + static_cast<unsigned>(rng() % 28)};
    auto got = score_offline(idx, q);
    auto want = testing::brute_force_bm25(docs, query_terms(q), q.date_cutoff);
    std::string r = "corpus " + std::to_string(round);
    c.expect(got.size() == want.size(), r + ": result counts differ");
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
      c.expect(idx.documents()[got[i].doc].url == want[i].url, r + ": rank " + std::to_string(i + 1) + " differs");
      worst = std::max(worst, std::abs(got[i].score - want[i].score));
    }
    hits += got.size();

    std::set<std::string> prev;
    q.date_cutoff = Date{2014, 12, 31};
    for (const auto& h : rank_offline(idx, q, 1000)) prev.insert(h.url);
    for (unsigned m = 12; m >= 1; --m) {
      q.date_cutoff = Date{2014, m, 1};
      std::set<std::string> cur;
      for (const auto& h : rank_offline(idx, q, 1000)) cur.insert(h.url);
      for (const auto& u : cur) c.expect(prev.count(u) > 0, r + ": earlier cutoff added " + u);
      prev = std::move(cur);
    }
  }
  c.expect(worst <= 1e-9, "score gap " + std::to_string(worst));
  return c.done("10 corpora, " + std::to_string(hits) + " ranked hits, max score gap " + std::to_string(worst) +
                ", cutoff monotone");
}

Outcome loocv_integrity() {
  Check c;
  std::mt19937_64 rng(238);
  std::size_t total = 0;
  for (int round = 0; round < 100; ++round) {
    std::vector<EnrichedEntry> entries;
    std::size_t n = 5 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) entries.push_back(testing::random_entry(rng, i));
    // Every event needs at least one thread.
    for (std::size_t k = 0; k < kAllEvents.size(); ++k) {
      entries[k].thread.event = kAllEvents[k];
      entries[k].thread.source.event = kAllEvents[k];
    }
    std::vector<FoldSpec> folds;
    try {
      folds = make_folds(entries, false);
    } catch (const Error& e) {
      c.expect(false, "round " + std::to_string(round) + ": " + e.what());
      continue;
    }
    std::map<std::string, int> test_count, train_count;
    std::map<std::string, Event> event_of;
    for (const auto& e : entries) event_of[e.thread.id()] = e.thread.event;
    c.expect(folds.size() == 5, "round " + std::to_string(round) + ": " + std::to_string(folds.size()) + " folds");
    for (const auto& f : folds) {
      std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
      for (const auto& id : f.test_ids) {
        ++test_count[id];
        c.expect(!train.count(id), "round " + std::to_string(round) + ": " + id + " leaks into training");
        c.expect(event_of.at(id) == f.held_out_event, "round " + std::to_string(round) + ": " + id + " in wrong fold");
      }
      for (const auto& id : f.train_ids) ++train_count[id];
    }
    for (const auto& [id, ev] : event_of) {
      c.expect(test_count[id] == 1, id + " tested " + std::to_string(test_count[id]) + " times");
      c.expect(train_count[id] == 4, id + " trained " + std::to_string(train_count[id]) + " times");
    }
    total += entries.size();
  }
  return c.done("100 corpora, " + std::to_string(total) + " threads, each tested once and trained 4 times");
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = testing::read_file(e.path());
  return files;
}

Outcome determinism() {
  Check c;
  testing::TempDir a, b;
  std::string err;
  c.expect(testing::run_offline_pipeline(a.str(), SCORER_STUB, &err) == 0, "first run: " + err);
  c.expect(testing::run_offline_pipeline(b.str(), SCORER_STUB, &err) == 0, "second run: " + err);
  auto fa = snapshot(a.path()), fb = snapshot(b.path());
  c.expect(fa.size() == fb.size(), "file counts differ");
  c.expect(!fa.empty(), "no output files");
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    c.expect(it != fb.end() && it->second == bytes, name + " differs");
  }
  return c.done(std::to_string(fa.size()) + " output files byte-identical across two runs");
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"charlie_hebdo_queries", charlie_hebdo_queries},
      {"macro_f1_bert", [] { return macro_triple({0.221, 0.549, 0.265}, 0.345); }},
      {"macro_f1_roberta", [] { return macro_triple({0.384, 0.600, 0.279}, 0.421); }},
      {"macro_f1_nli_san", [] { return macro_triple({0.186, 0.480, 0.250}, 0.405); }},
      {"corpus_cross_footing", corpus_cross_footing},
      {"metric_ordering", metric_ordering},
      {"sentence_selection_oracle", sentence_selection_oracle},
      {"bm25_oracle", bm25_oracle},
      {"loocv_integrity", loocv_integrity},
      {"determinism", determinism},
  };
  return all;
}

}  // namespace
}  // namespace rumour

int main(int argc, char** argv) {
  using rumour::criteria;
  if (argc == 2 && std::string(argv[1]) == "--list") {
    for (const auto& [name, fn] : criteria()) std::cout << name << '\n';
    return 0;
  }
  std::set<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    bool known = false;
    for (const auto& [name, fn] : criteria()) known = known || name == w;
    if (!known) {
      std::cerr << "unknown criterion: " << w << '\n';
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [name, fn] : criteria()) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    rumour::Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
