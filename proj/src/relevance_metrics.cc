#include "rumour/relevance_metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rumour/stopwords.h"
#include "rumour/url.h"

namespace rumour {

namespace {

const std::set<std::string>& url_boilerplate() {
  static const std::set<std::string> kWords = {
      "http", "https", "www", "html", "htm", "shtml", "php", "asp", "aspx", "jsp",
      "index", "amp", "com", "org", "net", "co", "uk", "cgi", "cfm"};
  return kWords;
}

std::vector<std::string> lowercase_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : treebank_tokenize(text)) out.push_back(to_lower(t));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

EmbeddingStore EmbeddingStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embedding file '" + path + "'");
  return read(in);
}

EmbeddingStore EmbeddingStore::read(std::istream& in) {
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      double a = 0, b = 0;
      if (fields.size() == 2 && parse_double(fields[0], a) && parse_double(fields[1], b) &&
          fields[0].find('.') == std::string::npos)
        continue;  // word2vec header
    }
    if (store.dimension_ == 0) {
      store.dimension_ = fields.size() - 1;
      if (store.dimension_ == 0) throw ValidationError("embedding line " + std::to_string(line_no) + " has no vector");
    }
    if (fields.size() != store.dimension_ + 1)
      throw ValidationError("embedding line " + std::to_string(line_no) + ": expected " +
                            std::to_string(store.dimension_) + " values");
    std::vector<double> vec(store.dimension_);
    for (std::size_t i = 0; i < store.dimension_; ++i)
      if (!parse_double(fields[i + 1], vec[i]))
        throw ValidationError("embedding line " + std::to_string(line_no) + ": bad number");
    store.add(fields[0], std::move(vec));
  }
  return store;
}

void EmbeddingStore::add(std::string_view word, std::vector<double> vec) {
  if (dimension_ == 0) dimension_ = vec.size();
  if (vec.size() != dimension_)
    throw ValidationError("embedding for '" + std::string(word) + "' has wrong dimension");
  vectors_.emplace(to_lower(word), std::move(vec));
}

std::optional<std::span<const double>> EmbeddingStore::lookup(std::string_view word) const {
  auto it = vectors_.find(to_lower(word));
  if (it == vectors_.end()) return std::nullopt;
  return std::span<const double>(it->second);
}

EmbeddingStore EmbeddingStore::scaled(double factor) const {
  EmbeddingStore out(dimension_);
  out.vectors_ = vectors_;
  for (auto& [w, v] : out.vectors_)
    for (double& x : v) x *= factor;
  return out;
}

std::optional<std::vector<double>> mean_vector(const std::vector<std::string>& words, const EmbeddingStore& store) {
  std::vector<double> sum(store.dimension(), 0.0);
  std::size_t known = 0;
  for (const auto& w : words) {
    auto v = store.lookup(w);
    if (!v) continue;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++known;
  }
  if (known == 0) return std::nullopt;
  for (double& x : sum) x /= static_cast<double>(known);
  return sum;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> url_words(std::string_view url, const SegmentationDictionary& dict) {
  ParsedUrl u = parse_url(url);
  std::string text = join(host_content_labels(u.host), "/") + u.path;
  std::vector<std::string> runs;
  std::string cur;
  for (char c : text) {
    if (is_alpha_ascii(c)) {
      cur += c;
    } else if (!cur.empty()) {
      runs.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) runs.push_back(std::move(cur));

  std::vector<std::string> out;
  for (const auto& run : runs) {
    for (auto& w : segment_hashtag(run, dict)) {
      std::string lw = to_lower(w);
      if (lw.size() < 2 || default_stopwords().count(lw) || url_boilerplate().count(lw)) continue;
      out.push_back(std::move(lw));
    }
  }
  return out;
}

std::vector<double> url_word_cosines(const std::vector<ArticleDoc>& articles,
                                     const std::vector<std::string>& response_urls, const EmbeddingStore& store,
                                     const SegmentationDictionary& dict) {
  auto vector_of = [&](const std::string& url) -> std::optional<std::vector<double>> {
    try {
      return mean_vector(url_words(url, dict), store);
    } catch (const UnparseableUrl&) {
      return std::nullopt;
    }
  };
  std::vector<std::vector<double>> responses;
  for (const auto& r : response_urls)
    if (auto v = vector_of(r)) responses.push_back(std::move(*v));

  std::vector<double> out;
  for (const auto& a : articles) {
    auto av = vector_of(a.url);
    if (!av) continue;
    for (const auto& rv : responses) out.push_back(std::max(0.0, cosine(*av, rv)));
  }
  return out;
}

double url_words_score(const std::vector<ArticleDoc>& articles, const std::vector<std::string>& response_urls,
                       const EmbeddingStore& store, const SegmentationDictionary& dict) {
  auto cos = url_word_cosines(articles, response_urls, store, dict);
  if (cos.empty()) throw NoScorablePairs("no (article, response) URL pair has known words on both sides");
  double sum = 0;
  for (double c : cos) sum += c;
  return std::clamp(sum / static_cast<double>(cos.size()), 0.0, 1.0);
}

std::vector<std::string> article_units(const ArticleDoc& article) {
  std::vector<std::string> units;
  if (!article.title.empty()) units.push_back(article.title);
  for (const auto& p : article.paragraphs) {
    if (units.size() >= kMaxArticleUnits) break;
    units.push_back(p);
  }
  return units;
}

double paragraph_score(const ArticleDoc& article, const PreprocessedTweet& rumour, const EmbeddingStore& store) {
  std::vector<std::string> rumour_words;
  for (const auto& t : rumour.tokens) rumour_words.push_back(to_lower(t));
  auto rv = mean_vector(rumour_words, store);
  if (!rv) throw NoKnownWords("rumour '" + rumour.source_id + "' has no known words");
  double sum = 0;
  std::size_t n = 0;
  for (const auto& unit : article_units(article)) {
    auto uv = mean_vector(lowercase_tokens(unit), store);
    if (!uv) continue;
    sum += std::max(0.0, cosine(*uv, *rv));
    ++n;
  }
  if (n == 0) throw NoKnownWords("article '" + article.url + "' has no known words");
  return std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
}

double external_score(const ArticleDoc& article, const PreprocessedTweet& rumour, PairScorer& scorer) {
  auto units = article_units(article);
  if (units.empty()) throw NoKnownWords("article '" + article.url + "' has no text units");
  std::string rumour_text = join(rumour.tokens, " ");
  double sum = 0;
  for (const auto& unit : units) sum += std::clamp(scorer.score(unit, rumour_text), 0.0, 1.0);
  return sum / static_cast<double>(units.size());
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kUrlWords: return "url_words";
    case Metric::kParagraphEmbedding: return "paragraph_embedding";
    case Metric::kExternal: return "external";
  }
  return "?";
}

MetricReport score_strategy(const StrategyEvidence& evidence, const std::map<std::string, RumourContext>& rumours,
                            const MetricResources& res) {
  if (!res.url_store || !res.paragraph_store || !res.dict)
    throw ValidationError("metric scoring needs both embedding stores and a dictionary");
  MetricReport report;
  report.strategy = evidence.strategy;
  double url_sum = 0, para_sum = 0, ext_sum = 0;
  std::size_t ext_n = 0;
  for (const auto& [thread_id, articles] : evidence.articles) {
    auto it = rumours.find(thread_id);
    if (it == rumours.end()) continue;
    const RumourContext& ctx = it->second;
    report.n_articles += articles.size();
    for (double c : url_word_cosines(articles, ctx.response_urls, *res.url_store, *res.dict)) {
      url_sum += c;
      ++report.url_pairs;
    }
    for (const auto& a : articles) {
      try {
        para_sum += paragraph_score(a, ctx.tweet, *res.paragraph_store);
        ++report.paragraph_articles;
      } catch (const NoKnownWords&) {
      }
      if (res.external) {
        try {
          ext_sum += external_score(a, ctx.tweet, *res.external);
          ++ext_n;
        } catch (const NoKnownWords&) {
        }
      }
    }
  }
  if (report.url_pairs) report.url_words_score = url_sum / static_cast<double>(report.url_pairs);
  if (report.paragraph_articles)
    report.paragraph_embed_score = para_sum / static_cast<double>(report.paragraph_articles);
  if (res.external) report.external_score = ext_n ? ext_sum / static_cast<double>(ext_n) : 0.0;
  return report;
}

StrategyComparison compare_strategies(const std::vector<StrategyEvidence>& evidence,
                                      const std::map<std::string, RumourContext>& rumours,
                                      const MetricResources& res) {
  StrategyComparison out;
  for (const auto& e : evidence) out.rows.push_back(score_strategy(e, rumours, res));
  std::vector<Metric> metrics = {Metric::kUrlWords, Metric::kParagraphEmbedding};
  if (res.external) metrics.push_back(Metric::kExternal);
  for (Metric m : metrics) {
    auto value = [m](const MetricReport& r) {
      switch (m) {
        case Metric::kUrlWords: return r.url_words_score;
        case Metric::kParagraphEmbedding: return r.paragraph_embed_score;
        case Metric::kExternal: return r.external_score.value_or(0.0);
      }
      return 0.0;
    };
    std::vector<std::size_t> idx(out.rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return value(out.rows[a]) > value(out.rows[b]); });
    auto& order = out.order[m];
    for (std::size_t i : idx) order.push_back(out.rows[i].strategy);
  }
  for (const auto& [m, order] : out.order)
    if (order != out.order.begin()->second) out.consistent_order = false;
  return out;
}

}  // namespace rumour
