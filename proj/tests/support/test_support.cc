#include "test_support.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rumour/cli.h"

namespace rumour::testing {

namespace fs = std::filesystem;

std::string fixture(const std::string& relative) { return std::string(RUMOUR_FIXTURE_DIR) + "/" + relative; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "rumour-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

struct Candidate {
  double log_prob = 0.0;
  std::vector<std::size_t> lengths;
};

// Higher probability (within a relative 1e-9), then fewer words, then the
// longer word at the first position where the splits differ.
bool preferred(const Candidate& a, const Candidate& b) {
  double scale = std::max({1.0, std::fabs(a.log_prob), std::fabs(b.log_prob)});
  if (std::fabs(a.log_prob - b.log_prob) > 1e-9 * scale) return a.log_prob > b.log_prob;
  if (a.lengths.size() != b.lengths.size()) return a.lengths.size() < b.lengths.size();
  return a.lengths > b.lengths;
}

std::vector<std::string> ascii_terms(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::optional<std::vector<std::string>> brute_force_segmentation(const std::string& text,
                                                                 const std::map<std::string, std::uint64_t>& counts) {
  const std::size_t n = text.size();
  if (n == 0 || n > 20) return std::nullopt;
  double total = 0;
  for (const auto& [w, c] : counts) total += static_cast<double>(c);
  const double denom = total + static_cast<double>(counts.size());
  std::optional<Candidate> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    Candidate cand;
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t i = 1; i <= n && ok; ++i) {
      bool cut = i == n || (mask >> (i - 1)) & 1;
      if (!cut) continue;
      auto it = counts.find(lower(text.substr(start, i - start)));
      if (it == counts.end()) {
        ok = false;
        break;
      }
      cand.log_prob += std::log((static_cast<double>(it->second) + 1.0) / denom);
      cand.lengths.push_back(i - start);
      start = i;
    }
    if (ok && (!best || preferred(cand, *best))) best = cand;
  }
  if (!best) return std::nullopt;
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (std::size_t len : best->lengths) {
    out.push_back(text.substr(pos, len));
    pos += len;
  }
  return out;
}

std::vector<BruteForceHit> brute_force_bm25(const std::vector<CorpusDocument>& docs,
                                            const std::vector<std::string>& query_terms, const Date& cutoff,
                                            double k1, double b) {
  std::vector<std::vector<std::string>> terms(docs.size());
  double total_len = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto add = [&](const std::string& t) {
      for (auto& w : ascii_terms(t)) terms[d].push_back(w);
    };
    add(docs[d].title);
    for (const auto& p : docs[d].paragraphs) add(p);
    total_len += static_cast<double>(terms[d].size());
  }
  double avg = docs.empty() ? 1.0 : total_len / static_cast<double>(docs.size());
  if (avg <= 0) avg = 1.0;
  const double n = static_cast<double>(docs.size());

  std::vector<std::string> distinct;
  for (const auto& t : query_terms)
    if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);

  std::vector<BruteForceHit> hits;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (!(docs[d].publish_date < cutoff)) continue;
    double score = 0;
    bool matched = false;
    for (const auto& q : distinct) {
      double tf = static_cast<double>(std::count(terms[d].begin(), terms[d].end(), q));
      if (tf == 0) continue;
      double df = 0;
      for (const auto& other : terms)
        if (std::find(other.begin(), other.end(), q) != other.end()) ++df;
      double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      double len = static_cast<double>(terms[d].size());
      score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg));
      matched = true;
    }
    if (matched) hits.push_back({docs[d].url, score});
  }
  std::sort(hits.begin(), hits.end(), [](const BruteForceHit& x, const BruteForceHit& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.url < y.url;
  });
  return hits;
}

std::vector<ScoredSentence> brute_force_selection(const std::vector<std::string>& rumour_tokens,
                                                  const std::vector<ArticleDoc>& articles,
                                                  const SelectionConfig& cfg) {
  std::set<std::string> rumour;
  for (const auto& t : rumour_tokens) rumour.insert(lower(t));
  std::vector<ScoredSentence> all;
  for (const auto& a : articles) {
    if (a.is_empty) continue;
    int position = 0;
    for (const auto& p : a.paragraphs) {
      for (const auto& text : split_sentences(p)) {
        ScoredSentence s;
        s.text = text;
        s.tokens = treebank_tokenize(text);
        s.source_url = a.url;
        s.article_rank = a.retrieved_rank;
        s.position_in_article = position++;
        if (s.tokens.size() < cfg.min_len) continue;
        std::set<std::string> important;
        for (const auto& t : s.tokens) {
          std::string w = lower(t);
          bool word = std::any_of(w.begin(), w.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80;
          });
          if (word && !cfg.stopwords.count(w)) important.insert(w);
        }
        for (const auto& w : important) s.raw_overlap += rumour.count(w) ? 1 : 0;
        double factor = 1.0;
        if (s.tokens.size() > cfg.max_len)
          factor = std::max(0.0, 1.0 - cfg.penalty_per_word * static_cast<double>(s.tokens.size() - cfg.max_len));
        s.final_score = s.raw_overlap * factor;
        if (s.final_score > 0) all.push_back(std::move(s));
      }
    }
  }
  std::sort(all.begin(), all.end(), [](const ScoredSentence& x, const ScoredSentence& y) {
    return std::tie(y.final_score, x.article_rank, x.position_in_article, x.source_url) <
           std::tie(x.final_score, y.article_rank, y.position_in_article, y.source_url);
  });
  if (all.size() > cfg.top_k) all.resize(cfg.top_k);
  return all;
}

std::string random_word(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
  return vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)];
}

std::vector<CorpusDocument> random_corpus(std::mt19937_64& rng, std::size_t max_docs,
                                          const std::vector<std::string>& vocab) {
  std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_docs)(rng);
  std::vector<CorpusDocument> docs(n);
  for (std::size_t d = 0; d < n; ++d) {
    docs[d].url = "http://site" + std::to_string(d % 7) + ".example/doc/" + std::to_string(d);
    std::size_t title_len = std::uniform_int_distribution<std::size_t>(0, 5)(rng);
    for (std::size_t i = 0; i < title_len; ++i) docs[d].title += (i ? " " : "") + random_word(rng, vocab);
    std::size_t paras = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
    for (std::size_t p = 0; p < paras; ++p) {
      std::string text;
      std::size_t len = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
      for (std::size_t i = 0; i < len; ++i) text += (i ? " " : "") + random_word(rng, vocab);
      docs[d].paragraphs.push_back(text);
    }
    docs[d].publish_date = Date{2014, static_cast<unsigned>(std::uniform_int_distribution<int>(1, 12)(rng)),
                                static_cast<unsigned>(std::uniform_int_distribution<int>(1, 28)(rng))};
  }
  return docs;
}

EnrichedEntry random_entry(std::mt19937_64& rng, std::size_t index) {
  static const std::vector<std::string> vocab = {"police", "say", "the", "gunman", "was", "seen", "near",
                                                 "parliament", "reports", "\"quoted\"", "café", "a\\b", "x"};
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  auto text = [&](std::size_t lo, std::size_t hi) {
    std::string t;
    std::size_t n = pick(lo, hi);
    for (std::size_t i = 0; i < n; ++i) t += (i ? " " : "") + random_word(rng, vocab);
    return t;
  };
  EnrichedEntry e;
  e.thread.event = kAllEvents[pick(0, 4)];
  e.thread.label = kAllLabels[pick(0, 2)];
  e.thread.source.id = std::to_string(500000000000000000ULL + index);
  e.thread.source.text = text(1, 12);
  e.thread.source.created_at = Date{2015, static_cast<unsigned>(pick(1, 12)), static_cast<unsigned>(pick(1, 28))};
  e.thread.source.event = e.thread.event;
  e.thread.source.author_handle = "author" + std::to_string(pick(0, 9));
  for (std::size_t r = 0, n = pick(0, 3); r < n; ++r) {
    RawTweet t;
    t.id = e.thread.source.id + "-" + std::to_string(r);
    t.text = text(0, 8);
    t.created_at = e.thread.source.created_at;
    t.event = e.thread.event;
    t.author_handle = "replier" + std::to_string(r);
    e.thread.reactions.push_back(t);
    if (pick(0, 1)) e.thread.reaction_urls.push_back("http://news.example/" + std::to_string(pick(0, 50)));
  }
  e.strategy_used = static_cast<Strategy>(pick(0, 2));
  for (std::size_t a = 0, n = pick(0, 4); a < n; ++a) {
    ArticleDoc doc;
    doc.url = "http://news.example/" + std::to_string(pick(0, 50));
    doc.title = text(1, 6);
    for (std::size_t p = 0, np = pick(1, 3); p < np; ++p) doc.paragraphs.push_back(text(3, 25));
    doc.retrieved_rank = static_cast<int>(a + 1);
    doc.fetch_date = "2015-01-0" + std::to_string(pick(1, 9)) + "T00:00:00Z";
    refresh_emptiness(doc);
    e.articles.push_back(doc);
  }
  for (std::size_t s = 0, n = e.articles.empty() ? 0 : pick(0, 5); s < n; ++s) {
    ScoredSentence sentence;
    sentence.text = text(5, 15);
    sentence.tokens = treebank_tokenize(sentence.text);
    sentence.source_url = e.articles[pick(0, e.articles.size() - 1)].url;
    sentence.article_rank = static_cast<int>(pick(1, 10));
    sentence.position_in_article = static_cast<int>(pick(0, 30));
    sentence.raw_overlap = static_cast<int>(pick(1, 9));
    sentence.final_score = std::uniform_real_distribution<double>(0.01, 10.0)(rng);
    e.selected_sentences.push_back(sentence);
  }
  e.complete = e.selected_sentences.size() == 5;
  return e;
}

void write_layout_corpus(const fs::path& root, const std::map<Event, std::array<std::size_t, 3>>& counts) {
  std::uint64_t next_id = 600000000000000000ULL;
  for (const auto& [event, per_label] : counts) {
    fs::path base = root / (std::string(event_name(event)) + "-all-rnr-threads") / "rumours";
    for (Label label : kAllLabels) {
      for (std::size_t i = 0; i < per_label[static_cast<std::size_t>(label)]; ++i) {
        std::string id = std::to_string(next_id++);
        fs::path dir = base / id;
        fs::create_directories(dir / "source-tweets");
        fs::create_directories(dir / "reactions");
        nlohmann::json tweet = {{"id_str", id},
                                {"text", "Rumour number " + id + " about " + std::string(event_display_name(event))},
                                {"created_at", "Mon Dec 15 01:00:00 +0000 2014"},
                                {"user", {{"screen_name", "source"}}}};
        std::ofstream(dir / "source-tweets" / (id + ".json")) << tweet.dump();
        nlohmann::json ann = {{"is_rumour", "rumour"},
                              {"misinformation", label == Label::kFalse ? "1" : "0"},
                              {"true", label == Label::kTrue ? "1" : "0"}};
        std::ofstream(dir / "annotation.json") << ann.dump();
      }
    }
  }
}

SelectionFixture random_selection_fixture(std::mt19937_64& rng, std::size_t max_sentences) {
  static const std::vector<std::string> vocab = {
      "police", "siege", "hostage", "gunman", "cafe",  "sydney", "paris", "suspects", "the",  "a",
      "of",     "town",  "shot",    "soldier", "crash", "pilot",  "plane", "alps",     "said", "reports"};
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  SelectionFixture f;
  f.rumour.source_id = "rumour";
  for (std::size_t i = 0, n = pick(3, 10); i < n; ++i) f.rumour.tokens.push_back(random_word(rng, vocab));
  std::size_t budget = pick(1, max_sentences);
  for (int rank = 1; f.sentences < budget; ++rank) {
    ArticleDoc a;
    a.url = "http://site" + std::to_string(pick(0, 3)) + ".com/a" + std::to_string(rank);
    a.title = "Article " + std::to_string(rank);
    a.retrieved_rank = rank;
    for (std::size_t p = 0, np = pick(1, 4); p < np && f.sentences < budget; ++p) {
      std::string para;
      for (std::size_t k = 0, ns = pick(1, 5); k < ns && f.sentences < budget; ++k, ++f.sentences) {
        std::string sentence;
        for (std::size_t w = 0, nw = pick(1, 32); w < nw; ++w) {
          std::string word = random_word(rng, vocab);
          if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
          sentence += (w ? " " : "") + word;
        }
        para += (para.empty() ? "" : " ") + sentence + ".";
      }
      a.paragraphs.push_back(para);
    }
    refresh_emptiness(a);
    f.articles.push_back(std::move(a));
  }
  return f;
}

PlantedMetrics planted_metrics() {
  struct Spec {
    std::string id, text, response, slug;
  };
  const std::vector<Spec> specs = {
      {"r1", "Massacre suspects hold hostage in industrial town northeast of Paris",
       "http://www.bbc.co.uk/news/paris-hostage-suspects", "massacre-suspects-hostage-paris"},
      {"r2", "Gunman holds hostages in Lindt cafe Sydney siege", "http://www.smh.com.au/sydney-siege-lindt-cafe",
       "gunman-hostages-lindt-cafe-siege"},
      {"r3", "Soldier shot at war memorial Ottawa parliament gunman", "http://www.cbc.ca/ottawa-soldier-shot-memorial",
       "soldier-shot-war-memorial-ottawa"},
  };
  const std::vector<std::string> decoy_words = {"weather", "forecast", "snow",  "winter",    "temperatures",
                                                "football", "match",   "goal",  "sport",     "stocks",
                                                "markets",  "investors", "trade", "tokyo",   "asia"};
  PlantedMetrics out;
  out.relevant.strategy = Strategy::kPreprocessed;
  out.decoy.strategy = Strategy::kDeprelShortened;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    RawTweet raw;
    raw.id = s.id;
    raw.text = s.text;
    raw.created_at = Date{2015, 1, 9};
    out.rumours[s.id] = {preprocess(raw), {s.response}};
    for (int k = 0; k < 3; ++k) {
      ArticleDoc a;
      a.url = "http://www.example" + std::to_string(k) + ".com/news/" + s.slug;
      a.title = s.text;
      a.paragraphs = {s.text + " said police", "Officials said the " + s.text};
      a.retrieved_rank = k + 1;
      refresh_emptiness(a);
      out.relevant.articles[s.id].push_back(a);

      ArticleDoc d;
      std::string w1 = decoy_words[(i * 5 + k) % decoy_words.size()];
      std::string w2 = decoy_words[(i * 5 + k + 1) % decoy_words.size()];
      std::string w3 = decoy_words[(i * 5 + k + 2) % decoy_words.size()];
      d.url = "http://www.example" + std::to_string(k) + ".com/sport/" + w1 + "-" + w2 + "-" + w3;
      d.title = w1 + " " + w2;
      d.paragraphs = {w1 + " " + w2 + " " + w3 + " " + w1, w3 + " " + w2};
      d.retrieved_rank = k + 1;
      refresh_emptiness(d);
      out.decoy.articles[s.id].push_back(d);
    }
  }
  return out;
}

int cli(const std::vector<std::string>& args, std::string* out, std::string* err) {
  std::ostringstream o, e;
  int code = run_cli(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

int run_offline_pipeline(const std::string& out_dir, const std::string& scorer, std::string* err) {
  const std::string backend = "--backend=offline:" + fixture("offline_corpus.jsonl");
  std::vector<std::vector<std::string>> stages = {
      {"preprocess", "--corpus", fixture("mini_corpus")},
      {"build-queries", "--strategy", "all", "--parses", fixture("parses10.conllu"), "--dict", fixture("dict.tsv")},
      {"search", "--strategy", "all", backend},
      {"compare-strategies", "--strategy", "all", "--embeddings", fixture("embeddings.txt"), "--dict",
       fixture("dict.tsv")},
      {"select-sentences"},
      {"assemble"},
      {"stats"},
      {"overlap", "--check-responses", backend},
      {"evaluate", "--no-quota"},
  };
  if (!scorer.empty()) stages[3].insert(stages[3].end(), {"--scorer", scorer});
  for (auto args : stages) {
    args.insert(args.end(), {"--out", out_dir});
    std::string e;
    int code = cli(args, nullptr, &e);
    if (code != 0) {
      if (err) *err = args[0] + ": " + e;
      return code;
    }
  }
  return 0;
}

}  // namespace rumour::testing
