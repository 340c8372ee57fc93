#include "rumour/retrieval.h"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "test_support.h"

namespace rumour {
namespace {

Query make_query(const std::string& body, Date cutoff = Date{2015, 1, 9},
                 std::vector<std::vector<std::string>> or_group = {}) {
  Query q;
  q.body_tokens = split_ws(body);
  q.date_cutoff = cutoff;
  q.or_group = std::move(or_group);
  return q;
}

CorpusDocument doc(const std::string& url, const std::string& text, Date d = Date{2015, 1, 1},
                   const std::string& title = "t") {
  return {url, title, {text}, d};
}

// Scripted backend: ranks 1..n, with chosen ranks empty.
class ScriptedBackend : public SearchBackend {
 public:
  ScriptedBackend(int n, std::set<int> empty) : n_(n), empty_(std::move(empty)) {}
  BackendCapabilities capabilities() const override { return {"scripted", true}; }
  std::vector<SearchResult> query(const Query&, std::size_t offset, std::size_t count) override {
    ++queries;
    std::vector<SearchResult> out;
    for (std::size_t r = offset + 1; r <= offset + count && static_cast<int>(r) <= n_; ++r)
      out.push_back({"http://s.com/" + std::to_string(r), static_cast<int>(r), "scripted"});
    return out;
  }
  ArticleDoc fetch(const SearchResult& r) override {
    ArticleDoc d;
    d.url = r.url;
    if (!empty_.count(r.rank)) {
      d.title = "title";
      d.paragraphs = {"a paragraph long enough to count"};
    }
    refresh_emptiness(d);
    return d;
  }
  int queries = 0;

 private:
  int n_;
  std::set<int> empty_;
};

std::vector<int> ranks(const std::vector<ArticleDoc>& docs) {
  std::vector<int> r;
  for (const auto& d : docs) r.push_back(d.retrieved_rank);
  return r;
}

TEST(Emptiness, TitleAndParagraphsRequired) {
  ArticleDoc d;
  refresh_emptiness(d);
  EXPECT_TRUE(d.is_empty);
  d.title = "Siege ends";
  refresh_emptiness(d);
  EXPECT_TRUE(d.is_empty);
  d.paragraphs = {"body"};
  refresh_emptiness(d);
  EXPECT_FALSE(d.is_empty);
  d.title.clear();
  refresh_emptiness(d);
  EXPECT_TRUE(d.is_empty);
}

TEST(ExtractArticle, TitleAndTwoParagraphs) {
  auto d = extract_article(
      "<html><head><title>Siege ends</title></head><body>"
      "<p>Hostages were released from the cafe overnight.</p>"
      "<p>Police confirmed the gunman had been killed.</p></body></html>",
      "http://x.com/a");
  EXPECT_EQ(d.title, "Siege ends");
  ASSERT_EQ(d.paragraphs.size(), 2u);
  EXPECT_FALSE(d.is_empty);
  EXPECT_EQ(d.url, "http://x.com/a");
}

TEST(ExtractArticle, NoTitleIsEmpty) {
  auto d = extract_article(
      "<html><body><p>Hostages were released from the cafe overnight.</p>"
      "<p>Police confirmed the gunman had been killed.</p></body></html>",
      "http://x.com/a");
  EXPECT_TRUE(d.title.empty());
  EXPECT_EQ(d.paragraphs.size(), 2u);
  EXPECT_TRUE(d.is_empty);
}

TEST(ExtractArticle, TitleOnlyIsEmpty) {
  auto d = extract_article("<html><head><title>Watch: the video</title></head><body><p>Play</p></body></html>", "u");
  EXPECT_EQ(d.title, "Watch: the video");
  EXPECT_TRUE(d.paragraphs.empty());
  EXPECT_TRUE(d.is_empty);
}

TEST(ExtractArticle, BoilerplateFixture) {
  auto d = extract_article(testing::read_file(testing::fixture("article_boilerplate.html")), "http://example.com/a");
  EXPECT_EQ(d.title, "Siege ends in Dammartin-en-Go\xC3\xABle");
  // Hand-labelled content paragraphs of the fixture, in order.
  std::vector<std::string> want = {
      "French police stormed a printing works northeast of Paris on Friday afternoon.",
      "The two suspects had been holed up inside since the early morning. Officials said a hostage was freed "
      "unharmed.",
      "Residents of the small industrial town were told to stay indoors & keep away from windows.",
  };
  EXPECT_EQ(d.paragraphs, want);
  for (const auto& p : d.paragraphs) {
    for (const char* junk : {"News, Sport", "World news", "Home >", "Share this", "Related:", "cookies",
                             "All rights reserved", "Contact the newsroom", "Commented out", "script"})
      EXPECT_EQ(p.find(junk), std::string::npos) << junk;
  }
  EXPECT_FALSE(d.is_empty);
}

TEST(ExtractArticle, MetaTitleThenHeadingFallback) {
  auto a = extract_article(
      "<html><head><meta property=\"og:title\" content=\"From meta\"></head>"
      "<body><h1>From heading</h1><p>Enough text to be a paragraph here.</p></body></html>",
      "u");
  EXPECT_EQ(a.title, "From meta");
  auto b = extract_article("<html><body><h1>From heading</h1><p>Enough text to be a paragraph here.</p></body></html>",
                           "u");
  EXPECT_EQ(b.title, "From heading");
  EXPECT_EQ(b.paragraphs, std::vector<std::string>{"Enough text to be a paragraph here."});
}

TEST(ExtractArticle, PlainText) {
  auto d = extract_article(
      "Siege ends\n\nHostages were released from the cafe overnight.\nMore followed.\n\nshort\n\n"
      "Police confirmed the gunman had been killed.\n",
      "u");
  EXPECT_EQ(d.title, "Siege ends");
  EXPECT_EQ(d.paragraphs, (std::vector<std::string>{"Hostages were released from the cafe overnight. More followed.",
                                                    "Police confirmed the gunman had been killed."}));
}

TEST(ExtractArticle, GarbageNeverThrows) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "<>/=\"' abcp!-&;#\n";
  for (int i = 0; i < 300; ++i) {
    std::string blob;
    for (int k = 0, n = static_cast<int>(rng() % 200); k < n; ++k) blob += alphabet[rng() % alphabet.size()];
    ArticleDoc d;
    EXPECT_NO_THROW(d = extract_article(blob, "u"));
    EXPECT_EQ(d.is_empty, d.title.empty() || d.paragraphs.empty());
    for (const auto& p : d.paragraphs) EXPECT_GE(p.size(), kMinParagraphChars);
  }
}

TEST(IndexTerms, LowercaseAlphanumeric) {
  EXPECT_EQ(index_terms("Paris: 2 Suspects, hostage-taking!"),
            (std::vector<std::string>{"paris", "2", "suspects", "hostage", "taking"}));
}

TEST(OfflineIndex, PostingsSortedAndLengths) {
  OfflineCorpusIndex idx({doc("a", "Siege siege ends"), doc("b", "siege now")});
  const auto* p = idx.postings("siege");
  ASSERT_NE(p, nullptr);
  ASSERT_EQ(p->size(), 2u);
  EXPECT_EQ((*p)[0].doc, 0u);
  EXPECT_EQ((*p)[0].tf, 2u);
  EXPECT_EQ((*p)[1].doc, 1u);
  EXPECT_EQ(idx.doc_length(0), 4u);  // title "t" counts
  EXPECT_DOUBLE_EQ(idx.average_length(), 3.5);
  EXPECT_EQ(idx.postings("Siege"), nullptr);
}

TEST(OfflineIndex, ReadRejectsBadLines) {
  std::istringstream ok(R"({"url":"u","title":"T","paragraphs":["p"],"publish_date":"2015-01-01"})" "\n\n");
  EXPECT_EQ(OfflineCorpusIndex::read(ok).size(), 1u);
  std::istringstream bad(R"({"url":"u","title":"T","paragraphs":["p"]})");
  EXPECT_THROW(OfflineCorpusIndex::read(bad), ValidationError);
  std::istringstream garbage("{nope");
  EXPECT_THROW(OfflineCorpusIndex::read(garbage), ValidationError);
  EXPECT_THROW(OfflineCorpusIndex::load("/nonexistent/corpus.jsonl"), ValidationError);
}

TEST(Bm25, HandComputedTermFrequencyOrder) {
  // Equal lengths, so the length norm is 1 for both.
  OfflineCorpusIndex idx({CorpusDocument{"b", "", {"siege siege ends"}, Date{2015, 1, 1}},
                          CorpusDocument{"a", "", {"siege ends now"}, Date{2015, 1, 1}}});
  auto scored = score_offline(idx, make_query("siege"));
  ASSERT_EQ(scored.size(), 2u);
  double idf = std::log(1.2);
  EXPECT_EQ(scored[0].doc, 0u);
  EXPECT_NEAR(scored[0].score, idf * 2 * 2.2 / 3.2, 1e-12);
  EXPECT_NEAR(scored[1].score, idf * 1.0, 1e-12);
}

TEST(Bm25, Idf) {
  EXPECT_NEAR(bm25_idf(10, 1), std::log(1 + 9.5 / 1.5), 1e-12);
  EXPECT_GT(bm25_idf(10, 10), 0.0);
}

TEST(Bm25, SingleDocAndDateFilter) {
  OfflineCorpusIndex idx({doc("http://a", "massacre suspects in Paris", Date{2015, 1, 8})});
  auto r = rank_offline(idx, make_query("massacre"), 5);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].rank, 1);
  EXPECT_EQ(r[0].url, "http://a");
  EXPECT_TRUE(rank_offline(idx, make_query("massacre", Date{2015, 1, 8}), 5).empty());
  OfflineCorpusIndex late({doc("http://a", "massacre suspects Paris", Date{2015, 1, 10})});
  EXPECT_TRUE(rank_offline(late, make_query("massacre suspects Paris"), 5).empty());
}

TEST(Bm25, TiesBrokenByUrl) {
  OfflineCorpusIndex idx({doc("http://z", "siege"), doc("http://m", "siege"), doc("http://a", "siege")});
  auto r = rank_offline(idx, make_query("siege"), 5);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].url, "http://a");
  EXPECT_EQ(r[1].url, "http://m");
  EXPECT_EQ(r[2].url, "http://z");
  EXPECT_EQ(r[2].rank, 3);
}

TEST(Bm25, OrGroupWordsAreShouldTerms) {
  OfflineCorpusIndex idx({doc("http://a", "charlie hebdo"), doc("http://b", "gunmen")});
  auto q = make_query("gunmen", Date{2015, 1, 9}, {{"Charlie", "Hebdo"}});
  EXPECT_EQ(query_terms(q), (std::vector<std::string>{"gunmen", "charlie", "hebdo"}));
  EXPECT_EQ(rank_offline(idx, q, 5).size(), 2u);
}

TEST(Bm25, PlantedDocumentRanksFirst) {
  std::vector<CorpusDocument> docs = {
      doc("http://decoy1", "the suspects were seen in Lyon"),
      doc("http://decoy2", "Paris weather today"),
      doc("http://planted", "massacre suspects seen near Paris"),
      doc("http://decoy3", "a massacre in history"),
  };
  OfflineCorpusIndex idx(docs);
  auto q = make_query("massacre suspects Paris");
  auto r = rank_offline(idx, q, 5);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r[0].url, "http://planted");
  auto oracle = testing::brute_force_bm25(docs, query_terms(q), q.date_cutoff);
  EXPECT_EQ(oracle[0].url, "http://planted");
}

TEST(Bm25Property, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> vocab = {"siege", "paris", "hostage", "police", "gunman", "cafe", "sydney",
                                          "crash", "pilot", "ottawa", "ferguson", "shot", "the", "a", "news"};
  for (int round = 0; round < 60; ++round) {
    auto docs = testing::random_corpus(rng, 50, vocab);
    OfflineCorpusIndex idx(docs);
    std::string body;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 4); k < n; ++k) body += testing::random_word(rng, vocab) + " ";
    Date cutoff{2014, 1 + static_cast<unsigned>(rng() % 12), 1 + static_cast<unsigned>(rng() % 28)};
    auto q = make_query(body, cutoff);
    auto got = score_offline(idx, q);
    auto want = testing::brute_force_bm25(docs, query_terms(q), cutoff);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(idx.documents()[got[i].doc].url, want[i].url);
      EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
    }
  }
}

TEST(Bm25Property, ShrinkingCutoffNeverAddsDocuments) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> vocab = {"siege", "paris", "hostage", "police", "gunman", "cafe"};
  for (int round = 0; round < 40; ++round) {
    auto docs = testing::random_corpus(rng, 40, vocab);
    OfflineCorpusIndex idx(docs);
    auto q = make_query(testing::random_word(rng, vocab) + " " + testing::random_word(rng, vocab),
                        Date{2014, 12, 31});
    std::set<std::string> prev;
    for (const auto& r : rank_offline(idx, q, 1000)) prev.insert(r.url);
    for (unsigned m = 12; m >= 1; --m) {
      q.date_cutoff = Date{2014, m, 1};
      std::set<std::string> cur;
      for (const auto& r : rank_offline(idx, q, 1000)) cur.insert(r.url);
      for (const auto& u : cur) EXPECT_TRUE(prev.count(u)) << u;
      prev = cur;
    }
  }
}

TEST(OfflineBackend, DeterministicAndFetchesStoredText) {
  auto idx = std::make_shared<OfflineCorpusIndex>(OfflineCorpusIndex::load(testing::fixture("offline_corpus.jsonl")));
  OfflineBackend a(idx), b(idx);
  auto q = make_query("Massacre suspects believed hostage industrial town northeast Paris");
  auto ra = search(q, a, 5), rb = search(q, b, 5);
  EXPECT_EQ(ra, rb);
  ASSERT_FALSE(ra.empty());
  for (const auto& d : ra) {
    EXPECT_FALSE(d.is_empty);
    EXPECT_EQ(d.url.find("followup"), std::string::npos);
    EXPECT_EQ(d.url.find("-video"), std::string::npos);
    EXPECT_EQ(d.fetch_date.size(), 20u);
  }
  EXPECT_EQ(a.capabilities().name, "offline");
  EXPECT_TRUE(a.capabilities().supports_date_filter);
}

TEST(Search, SkipsEmptyResults) {
  ScriptedBackend be(7, {2, 5});
  auto docs = search(make_query("x"), be, 5);
  EXPECT_EQ(ranks(docs), (std::vector<int>{1, 3, 4, 6, 7}));
}

TEST(Search, PagesDeeperUntilEnough) {
  ScriptedBackend be(40, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
  auto docs = search(make_query("x"), be, 3);
  EXPECT_EQ(ranks(docs), (std::vector<int>{13, 14, 15}));
  EXPECT_EQ(be.queries, 2);
}

TEST(Search, ExhaustedResults) {
  ScriptedBackend be(3, {2});
  EXPECT_EQ(ranks(search(make_query("x"), be, 5)), (std::vector<int>{1, 3}));
  ScriptedBackend none(0, {});
  EXPECT_TRUE(search(make_query("x"), none, 5).empty());
  EXPECT_TRUE(search(make_query("x"), be, 0).empty());
}

TEST(CollectEvidence, SecondPassContinues) {
  ScriptedBackend be(30, {2, 5});
  auto docs = collect_evidence(make_query("x"), be, 2, 5);
  EXPECT_EQ(ranks(docs), (std::vector<int>{1, 3, 4, 6, 7, 8, 9, 10, 11, 12}));
  ScriptedBackend short_be(6, {2});
  EXPECT_EQ(ranks(collect_evidence(make_query("x"), short_be, 2, 5)), (std::vector<int>{1, 3, 4, 5, 6}));
}

TEST(HostRateLimiter, SpacesRequestsPerHost) {
  HostRateLimiter lim(20.0);
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) lim.acquire("a.com");
  lim.acquire("b.com");
  auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_GE(elapsed, std::chrono::milliseconds(140));
  EXPECT_LT(elapsed, std::chrono::milliseconds(1000));
}

TEST(LiveBackend, RequestParams) {
  LiveBackendConfig cfg;
  cfg.endpoint = "https://search.example/v1";
  cfg.api_key = "k";
  cfg.engine_id = "e";
  LiveBackend be(cfg);
  auto q = make_query("Massacre suspects", Date{2015, 1, 9}, {{"Charlie", "Hebdo"}});
  auto p = be.request_params(q, 10, 10);
  using P = std::pair<std::string, std::string>;
  EXPECT_EQ(p, (std::vector<P>{{"q", "before:2015-01-09 (Charlie Hebdo) Massacre suspects"},
                               {"key", "k"},
                               {"cx", "e"},
                               {"start", "11"},
                               {"num", "10"}}));
  cfg.pass_before_operator = false;
  LiveBackend be2(cfg);
  auto p2 = be2.request_params(q, 0, 5);
  EXPECT_EQ(p2[0], (P{"q", "(Charlie Hebdo) Massacre suspects"}));
  EXPECT_EQ(p2[1], (P{"before", "2015-01-09"}));
}

TEST(LiveBackend, ConfigFromEnvironment) {
  setenv("RUMOUR_SEARCH_ENDPOINT", "http://127.0.0.1:1/s", 1);
  setenv("RUMOUR_SEARCH_API_KEY", "secret", 1);
  setenv("RUMOUR_SEARCH_ENGINE_ID", "cx1", 1);
  auto cfg = LiveBackendConfig::from_environment();
  EXPECT_EQ(cfg.endpoint, "http://127.0.0.1:1/s");
  EXPECT_EQ(cfg.api_key, "secret");
  EXPECT_EQ(cfg.engine_id, "cx1");
  unsetenv("RUMOUR_SEARCH_ENDPOINT");
  unsetenv("RUMOUR_SEARCH_API_KEY");
  unsetenv("RUMOUR_SEARCH_ENGINE_ID");
}

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      ++search_calls_;
      last_q_ = req.get_param_value("q");
      if (mode_ == "quota") {
        res.status = 429;
        res.set_content(R"({"error":{"message":"Quota exceeded"}})", "application/json");
        return;
      }
      if (mode_ == "flaky" && search_calls_ < 3) {
        res.status = 503;
        return;
      }
      if (mode_ == "down") {
        res.status = 500;
        return;
      }
      int start = std::stoi(req.get_param_value("start"));
      int num = std::stoi(req.get_param_value("num"));
      std::string items;
      for (int r = start; r < start + num && r <= 4; ++r) {
        if (!items.empty()) items += ",";
        items += R"({"link":")" + base_ + "/page/" + std::to_string(r) + R"("})";
      }
      res.set_content("{\"items\":[" + items + "]}", "application/json");
    });
    server_.Get(R"(/page/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
      std::string n = req.matches[1];
      if (n == "2") {
        res.set_content("<html><head><title>Video</title></head><body></body></html>", "text/html");
        return;
      }
      if (n == "3") {
        res.status = 404;
        return;
      }
      res.set_content("<html><head><title>Story " + n +
                          "</title></head><body><p>Police confirmed the siege had ended overnight.</p></body></html>",
                      "text/html");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    base_ = "http://127.0.0.1:" + std::to_string(port_);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  LiveBackendConfig config() const {
    LiveBackendConfig cfg;
    cfg.endpoint = base_ + "/search";
    cfg.initial_backoff = std::chrono::milliseconds(1);
    cfg.requests_per_second = 0;
    cfg.timeout = std::chrono::seconds(5);
    return cfg;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string base_;
  std::string mode_ = "ok";
  std::atomic<int> search_calls_{0};
  std::string last_q_;
};

TEST_F(LocalServer, SearchesAndFetches) {
  LiveBackend be(config());
  auto docs = search(make_query("siege ends", Date{2014, 12, 16}), be, 5);
  EXPECT_EQ(last_q_, "before:2014-12-16 siege ends");
  ASSERT_EQ(ranks(docs), (std::vector<int>{1, 4}));
  EXPECT_EQ(docs[0].title, "Story 1");
  EXPECT_EQ(docs[1].url, base_ + "/page/4");
  EXPECT_FALSE(docs[0].fetch_date.empty());
}

TEST_F(LocalServer, RetriesTransientFailures) {
  mode_ = "flaky";
  LiveBackend be(config());
  auto r = be.query(make_query("x"), 0, 2);
  EXPECT_EQ(r.size(), 2u);
  EXPECT_EQ(search_calls_.load(), 3);
}

TEST_F(LocalServer, GivesUpAfterBoundedAttempts) {
  mode_ = "down";
  LiveBackend be(config());
  EXPECT_THROW(be.query(make_query("x"), 0, 2), BackendUnavailable);
  EXPECT_EQ(search_calls_.load(), 3);
}

TEST_F(LocalServer, QuotaExceeded) {
  mode_ = "quota";
  LiveBackend be(config());
  EXPECT_THROW(be.query(make_query("x"), 0, 2), QuotaExceeded);
}

TEST(LiveBackend, UnreachableEndpoint) {
  LiveBackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/search";
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.requests_per_second = 0;
  cfg.timeout = std::chrono::seconds(1);
  LiveBackend be(cfg);
  EXPECT_THROW(be.query(make_query("x"), 0, 2), BackendUnavailable);
  auto d = be.fetch({"http://127.0.0.1:1/page", 1, "live"});
  EXPECT_TRUE(d.is_empty);
}

}  // namespace
}  // namespace rumour
