#include "rumour/sentence_select.h"

#include <algorithm>
#include <cctype>
#include <set>

namespace rumour {

namespace {

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> kAbbrev = {
      "mr", "mrs", "ms", "dr", "st", "prof", "sr", "jr", "gen", "sgt", "lt", "col", "capt",
      "gov", "sen", "rep", "rev", "inc", "ltd", "co", "corp", "no", "vs", "etc", "e.g",
      "i.e", "u.s", "u.k", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
      "oct", "nov", "dec", "mt", "ft", "approx", "dept", "est", "fig"};
  return kAbbrev;
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool starts_sentence(std::string_view s, std::size_t i) {
  if (i >= s.size()) return false;
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(' || c == '[') return true;
  // Curly opening quotes.
  return s.substr(i, 3) == "\xE2\x80\x9C" || s.substr(i, 3) == "\xE2\x80\x98";
}

std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void SelectionConfig::validate() const {
  if (!(min_len > 0 && min_len < max_len)) throw ValidationError("selection needs 0 < min_len < max_len");
  if (!(penalty_per_word >= 0 && penalty_per_word < 1)) throw ValidationError("selection needs 0 <= penalty < 1");
  if (top_k < 1) throw ValidationError("selection needs top_k >= 1");
}

std::string sentence_key(const std::string& url, int position) { return url + "#" + std::to_string(position); }

std::vector<std::string> triple_words(const ParsedSentence& s) {
  return surfaces(s, triple_token_union(extract_triples(s)));
}

std::vector<std::string> split_sentences(std::string_view p) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    char c = p[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < p.size() && (p[end] == '.' || p[end] == '!' || p[end] == '?')) ++end;
    while (end < p.size() && is_closer(p[end])) ++end;
    if (end >= p.size() || !std::isspace(static_cast<unsigned char>(p[end]))) continue;
    std::size_t next = end;
    while (next < p.size() && std::isspace(static_cast<unsigned char>(p[next]))) ++next;
    if (!starts_sentence(p, next)) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !std::isspace(static_cast<unsigned char>(p[w - 1])) && p[w - 1] != '(') --w;
      std::string word = to_lower(p.substr(w, i - w));
      if (abbreviations().count(word)) continue;
      if (word.size() == 1 && is_alpha_ascii(word[0])) continue;
    }
    std::string sentence = trim_copy(p.substr(start, end - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = next;
    i = next == 0 ? 0 : next - 1;
  }
  std::string tail = trim_copy(p.substr(std::min(start, p.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

double penalised_score(int raw_overlap, std::size_t length, const SelectionConfig& cfg) {
  if (length < cfg.min_len) return 0.0;
  if (length <= cfg.max_len) return raw_overlap;
  double factor = 1.0 - cfg.penalty_per_word * static_cast<double>(length - cfg.max_len);
  return raw_overlap * std::max(0.0, factor);
}

bool ranks_before(const ScoredSentence& a, const ScoredSentence& b) {
  if (a.final_score != b.final_score) return a.final_score > b.final_score;
  if (a.article_rank != b.article_rank) return a.article_rank < b.article_rank;
  if (a.position_in_article != b.position_in_article) return a.position_in_article < b.position_in_article;
  return a.source_url < b.source_url;
}

std::vector<ScoredSentence> score_sentences(const PreprocessedTweet& rumour, const std::vector<ArticleDoc>& articles,
                                            const TripleWordMap& triple_words, const SelectionConfig& cfg) {
  cfg.validate();
  std::set<std::string> rumour_words;
  for (const auto& t : rumour.tokens) rumour_words.insert(to_lower(t));

  std::vector<ScoredSentence> out;
  for (const auto& article : articles) {
    if (article.is_empty) continue;
    int position = 0;
    for (const auto& paragraph : article.paragraphs) {
      for (auto& text : split_sentences(paragraph)) {
        ScoredSentence s;
        s.tokens = treebank_tokenize(text);
        s.text = std::move(text);
        s.source_url = article.url;
        s.article_rank = article.retrieved_rank;
        s.position_in_article = position++;
        if (s.tokens.size() < cfg.min_len) continue;

        auto it = triple_words.find(sentence_key(s.source_url, s.position_in_article));
        const std::vector<std::string>& words = it != triple_words.end() ? it->second : s.tokens;
        std::set<std::string> important;
        for (const auto& w : words) {
          std::string lw = to_lower(w);
          bool has_alnum = std::any_of(lw.begin(), lw.end(), [](char c) { return is_word_byte(c) && c != '_'; });
          if (has_alnum && !cfg.stopwords.count(lw)) important.insert(std::move(lw));
        }
        for (const auto& w : important)
          if (rumour_words.count(w)) ++s.raw_overlap;
        s.final_score = penalised_score(s.raw_overlap, s.tokens.size(), cfg);
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::vector<ScoredSentence> rank_sentences(const PreprocessedTweet& rumour, const std::vector<ArticleDoc>& articles,
                                           const TripleWordMap& triple_words, const SelectionConfig& cfg) {
  auto all = score_sentences(rumour, articles, triple_words, cfg);
  std::erase_if(all, [](const ScoredSentence& s) { return s.final_score <= 0.0; });
  std::size_t k = std::min(cfg.top_k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), ranks_before);
  all.resize(k);
  return all;
}

std::vector<ScoredSentence> select_sentences(const PreprocessedTweet& rumour, const std::vector<ArticleDoc>& articles,
                                             const TripleWordMap& triple_words, const SelectionConfig& cfg) {
  auto ranked = rank_sentences(rumour, articles, triple_words, cfg);
  if (ranked.size() < cfg.top_k) throw InsufficientEvidence(rumour.source_id, std::move(ranked), cfg.top_k);
  return ranked;
}

}  // namespace rumour
