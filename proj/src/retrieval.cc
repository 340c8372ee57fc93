#include "rumour/retrieval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>

#include "json.hpp"

namespace rumour {

namespace {

bool ieq(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

const std::map<std::string_view, unsigned long>& named_entities() {
  static const std::map<std::string_view, unsigned long> kNames = {
      {"AElig", 0xC6}, {"Aacute", 0xC1}, {"Acirc", 0xC2}, {"Agrave", 0xC0}, {"Aring", 0xC5}, {"Atilde", 0xC3},
      {"Auml", 0xC4}, {"Ccedil", 0xC7}, {"ETH", 0xD0}, {"Eacute", 0xC9}, {"Ecirc", 0xCA}, {"Egrave", 0xC8},
      {"Euml", 0xCB}, {"Iacute", 0xCD}, {"Icirc", 0xCE}, {"Igrave", 0xCC}, {"Iuml", 0xCF}, {"Ntilde", 0xD1},
      {"Oacute", 0xD3}, {"Ocirc", 0xD4}, {"Ograve", 0xD2}, {"Oslash", 0xD8}, {"Otilde", 0xD5}, {"Ouml", 0xD6},
      {"THORN", 0xDE}, {"Uacute", 0xDA}, {"Ucirc", 0xDB}, {"Ugrave", 0xD9}, {"Uuml", 0xDC}, {"Yacute", 0xDD},
      {"aacute", 0xE1}, {"acirc", 0xE2}, {"acute", 0xB4}, {"aelig", 0xE6}, {"agrave", 0xE0}, {"aring", 0xE5},
      {"atilde", 0xE3}, {"auml", 0xE4}, {"brvbar", 0xA6}, {"ccedil", 0xE7}, {"cedil", 0xB8}, {"cent", 0xA2},
      {"copy", 0xA9}, {"curren", 0xA4}, {"deg", 0xB0}, {"divide", 0xF7}, {"eacute", 0xE9}, {"ecirc", 0xEA},
      {"egrave", 0xE8}, {"eth", 0xF0}, {"euml", 0xEB}, {"frac12", 0xBD}, {"frac14", 0xBC}, {"frac34", 0xBE},
      {"iacute", 0xED}, {"icirc", 0xEE}, {"iexcl", 0xA1}, {"igrave", 0xEC}, {"iquest", 0xBF}, {"iuml", 0xEF},
      {"laquo", 0xAB}, {"macr", 0xAF}, {"micro", 0xB5}, {"middot", 0xB7}, {"nbsp", 0xA0}, {"not", 0xAC},
      {"ntilde", 0xF1}, {"oacute", 0xF3}, {"ocirc", 0xF4}, {"ograve", 0xF2}, {"ordf", 0xAA}, {"ordm", 0xBA},
      {"oslash", 0xF8}, {"otilde", 0xF5}, {"ouml", 0xF6}, {"para", 0xB6}, {"plusmn", 0xB1}, {"pound", 0xA3},
      {"raquo", 0xBB}, {"reg", 0xAE}, {"sect", 0xA7}, {"shy", 0xAD}, {"sup1", 0xB9}, {"sup2", 0xB2},
      {"sup3", 0xB3}, {"szlig", 0xDF}, {"thorn", 0xFE}, {"times", 0xD7}, {"uacute", 0xFA}, {"ucirc", 0xFB},
      {"ugrave", 0xF9}, {"uml", 0xA8}, {"uuml", 0xFC}, {"yacute", 0xFD}, {"yen", 0xA5}, {"yuml", 0xFF},
      {"ndash", 0x2013}, {"mdash", 0x2014}, {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"sbquo", 0x201A},
      {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"bdquo", 0x201E}, {"hellip", 0x2026}, {"bull", 0x2022},
      {"euro", 0x20AC}, {"trade", 0x2122}, {"prime", 0x2032}};
  return kNames;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += '&';
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    std::string decoded;
    if (name == "amp") decoded = "&";
    else if (name == "lt") decoded = "<";
    else if (name == "gt") decoded = ">";
    else if (name == "quot") decoded = "\"";
    else if (name == "apos") decoded = "'";
    else if (name == "nbsp") decoded = " ";
    else if (auto it = named_entities().find(name); it != named_entities().end()) append_utf8(decoded, it->second);
    else if (name.size() > 1 && name[0] == '#') {
      unsigned long cp = 0;
      bool ok = true;
      if (name[1] == 'x' || name[1] == 'X') {
        for (char c : name.substr(2)) {
          if (!std::isxdigit(static_cast<unsigned char>(c))) ok = false;
          else cp = cp * 16 + static_cast<unsigned long>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (std::tolower(c) - 'a' + 10));
        }
      } else {
        for (char c : name.substr(1)) {
          if (!is_digit_ascii(c)) ok = false;
          else cp = cp * 10 + static_cast<unsigned long>(c - '0');
        }
      }
      if (ok) append_utf8(decoded, cp);
    }
    if (decoded.empty()) {
      out += '&';
      continue;
    }
    out += decoded;
    i = semi;
  }
  return out;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

bool looks_like_html(std::string_view blob) {
  for (std::size_t i = 0; i + 1 < blob.size(); ++i)
    if (blob[i] == '<' && (is_alpha_ascii(blob[i + 1]) || blob[i + 1] == '!' || blob[i + 1] == '/'))
      return blob.find('>', i) != std::string_view::npos;
  return false;
}

const std::set<std::string>& skipped_elements() {
  static const std::set<std::string> kSkip = {
      "script", "style", "noscript", "nav", "footer", "header", "aside", "form",
      "template", "svg", "iframe", "button", "select", "head", "menu"};
  return kSkip;
}

const std::set<std::string>& block_elements() {
  static const std::set<std::string> kBlock = {
      "p", "div", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "td", "th", "tr",
      "table", "blockquote", "article", "section", "main", "pre", "dd", "dt", "dl",
      "figcaption", "figure", "br", "hr", "body", "html", "title"};
  return kBlock;
}

const std::set<std::string>& void_elements() {
  static const std::set<std::string> kVoid = {"br", "hr", "img", "meta", "link", "input",
                                               "area", "base", "col", "embed", "source",
                                               "track", "wbr", "param"};
  return kVoid;
}

bool boilerplate_attr(std::string_view value) {
  static constexpr std::string_view kMarkers[] = {
      "nav", "menu", "footer", "cookie", "breadcrumb", "sidebar", "share", "social",
      "subscribe", "newsletter", "banner", "advert", "promo", "related"};
  std::string v = to_lower(value);
  for (auto m : kMarkers)
    if (v.find(m) != std::string::npos) return true;
  return false;
}

bool boilerplate_text(std::string_view text) {
  static constexpr std::string_view kPhrases[] = {
      "all rights reserved", "copyright \xC2\xA9", "\xC2\xA9 copyright", "cookie policy",
      "privacy policy", "terms of use", "sign up for our", "subscribe to our",
      "skip to main content", "follow us on"};
  std::string t = to_lower(text);
  for (auto p : kPhrases)
    if (t.find(p) != std::string::npos) return true;
  return false;
}

struct Tag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::map<std::string, std::string> attrs;
};

Tag parse_tag(std::string_view body) {
  Tag tag;
  std::size_t i = 0;
  if (i < body.size() && body[i] == '/') {
    tag.closing = true;
    ++i;
  }
  std::size_t start = i;
  while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) && body[i] != '/' && body[i] != '>')
    ++i;
  tag.name = to_lower(body.substr(start, i - start));
  while (i < body.size()) {
    while (i < body.size() && (std::isspace(static_cast<unsigned char>(body[i])) || body[i] == '/')) {
      if (body[i] == '/' && i + 1 == body.size()) tag.self_closing = true;
      ++i;
    }
    std::size_t ks = i;
    while (i < body.size() && body[i] != '=' && !std::isspace(static_cast<unsigned char>(body[i])) && body[i] != '/')
      ++i;
    std::string key = to_lower(body.substr(ks, i - ks));
    if (key.empty()) {
      ++i;
      continue;
    }
    std::string value;
    if (i < body.size() && body[i] == '=') {
      ++i;
      if (i < body.size() && (body[i] == '"' || body[i] == '\'')) {
        char q = body[i++];
        std::size_t vs = i;
        while (i < body.size() && body[i] != q) ++i;
        value = std::string(body.substr(vs, i - vs));
        if (i < body.size()) ++i;
      } else {
        std::size_t vs = i;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        value = std::string(body.substr(vs, i - vs));
      }
    }
    tag.attrs[key] = decode_entities(value);
  }
  return tag;
}

ArticleDoc extract_html(std::string_view html, std::string_view url) {
  ArticleDoc doc;
  doc.url = std::string(url);

  struct Open {
    std::string name;
    bool skips;
  };
  std::vector<Open> stack;
  int skip_depth = 0;
  bool in_title = false, in_h1 = false;
  std::string title_text, meta_title, h1_text, run;

  auto flush = [&] {
    std::string text = collapse_ws(decode_entities(run));
    run.clear();
    if (utf8_length(text) >= kMinParagraphChars && !boilerplate_text(text)) doc.paragraphs.push_back(text);
  };

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      std::size_t j = html.find('<', i);
      if (j == std::string_view::npos) j = html.size();
      std::string_view text = html.substr(i, j - i);
      if (in_title) title_text += text;
      else if (skip_depth == 0) {
        if (in_h1) h1_text += text;
        else run += text;
      }
      i = j;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    auto close = html.find('>', i);
    if (close == std::string_view::npos) break;
    std::string_view body = html.substr(i + 1, close - i - 1);
    i = close + 1;
    if (body.empty() || body[0] == '!' || body[0] == '?') continue;
    Tag tag = parse_tag(body);
    if (tag.name.empty()) continue;

    if (tag.name == "title") {
      in_title = !tag.closing;
      continue;
    }
    if (tag.name == "meta" && !tag.closing) {
      auto prop = tag.attrs.count("property") ? tag.attrs["property"] : tag.attrs["name"];
      if ((ieq(prop, "og:title") || ieq(prop, "twitter:title")) && meta_title.empty())
        meta_title = tag.attrs["content"];
      continue;
    }
    if (block_elements().count(tag.name) && skip_depth == 0) flush();

    // Raw-text elements: jump to the matching close tag.
    if (!tag.closing && (tag.name == "script" || tag.name == "style")) {
      std::string end = "</" + tag.name;
      std::size_t pos = i;
      while (pos < html.size()) {
        pos = html.find("</", pos);
        if (pos == std::string_view::npos || ieq(html.substr(pos, end.size()), end)) break;
        pos += 2;
      }
      if (pos == std::string_view::npos) break;
      auto gt = html.find('>', pos);
      i = gt == std::string_view::npos ? html.size() : gt + 1;
      continue;
    }

    if (tag.closing) {
      auto it = std::find_if(stack.rbegin(), stack.rend(), [&](const Open& o) { return o.name == tag.name; });
      if (it == stack.rend()) continue;
      std::size_t keep = static_cast<std::size_t>(stack.rend() - it) - 1;
      for (std::size_t k = keep; k < stack.size(); ++k)
        if (stack[k].skips) --skip_depth;
      stack.resize(keep);
      if (tag.name == "h1") in_h1 = false;
      continue;
    }
    if (void_elements().count(tag.name) || tag.self_closing) continue;
    bool skips = skipped_elements().count(tag.name) > 0 ||
                 (tag.attrs.count("class") && boilerplate_attr(tag.attrs["class"])) ||
                 (tag.attrs.count("id") && boilerplate_attr(tag.attrs["id"])) ||
                 (tag.attrs.count("role") && boilerplate_attr(tag.attrs["role"]));
    // <p> implicitly closes an open <p>.
    if (tag.name == "p" && !stack.empty() && stack.back().name == "p") {
      if (stack.back().skips) --skip_depth;
      stack.pop_back();
    }
    stack.push_back({tag.name, skips});
    if (skips) ++skip_depth;
    if (tag.name == "h1" && skip_depth == 0 && h1_text.empty()) in_h1 = true;
  }
  flush();

  std::string title = collapse_ws(decode_entities(title_text));
  if (title.empty()) title = collapse_ws(meta_title);
  if (title.empty()) title = collapse_ws(decode_entities(h1_text));
  doc.title = title;
  refresh_emptiness(doc);
  return doc;
}

ArticleDoc extract_plain(std::string_view text, std::string_view url) {
  ArticleDoc doc;
  doc.url = std::string(url);
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.emplace_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  std::size_t li = 0;
  while (li < lines.size() && collapse_ws(lines[li]).empty()) ++li;
  if (li < lines.size()) doc.title = collapse_ws(lines[li++]);
  std::string block;
  auto flush = [&] {
    std::string p = collapse_ws(block);
    block.clear();
    if (utf8_length(p) >= kMinParagraphChars && !boilerplate_text(p)) doc.paragraphs.push_back(p);
  };
  for (; li < lines.size(); ++li) {
    if (collapse_ws(lines[li]).empty()) flush();
    else block += lines[li] + " ";
  }
  flush();
  refresh_emptiness(doc);
  return doc;
}

}  // namespace

void refresh_emptiness(ArticleDoc& doc) { doc.is_empty = doc.title.empty() || doc.paragraphs.empty(); }

ArticleDoc extract_article(std::string_view blob, std::string_view url) {
  return looks_like_html(blob) ? extract_html(blob, url) : extract_plain(blob, url);
}

std::vector<std::string> index_terms(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (is_alpha_ascii(c) || is_digit_ascii(c) || static_cast<unsigned char>(c) >= 0x80) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

OfflineCorpusIndex::OfflineCorpusIndex(std::vector<CorpusDocument> docs) : docs_(std::move(docs)) {
  lengths_.resize(docs_.size());
  double total = 0.0;
  for (std::uint32_t d = 0; d < docs_.size(); ++d) {
    const auto& doc = docs_[d];
    std::map<std::string, std::uint32_t> tf;
    std::uint32_t len = 0;
    auto add = [&](const std::string& text) {
      for (auto& t : index_terms(text)) {
        ++tf[t];
        ++len;
      }
    };
    add(doc.title);
    for (const auto& p : doc.paragraphs) add(p);
    for (const auto& [term, count] : tf) postings_[term].push_back({d, count});
    lengths_[d] = len;
    total += len;
    by_url_.emplace(doc.url, d);
  }
  avg_length_ = docs_.empty() ? 0.0 : total / static_cast<double>(docs_.size());
}

OfflineCorpusIndex OfflineCorpusIndex::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open offline corpus '" + path + "'");
  return read(in);
}

OfflineCorpusIndex OfflineCorpusIndex::read(std::istream& in) {
  std::vector<CorpusDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      CorpusDocument d;
      d.url = j.at("url").get<std::string>();
      d.title = j.value("title", std::string());
      if (j.contains("paragraphs"))
        for (const auto& p : j.at("paragraphs")) d.paragraphs.push_back(p.get<std::string>());
      d.publish_date = Date::parse(j.at("publish_date").get<std::string>());
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("offline corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("offline corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return OfflineCorpusIndex(std::move(docs));
}

const std::vector<OfflineCorpusIndex::Posting>* OfflineCorpusIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

const CorpusDocument* OfflineCorpusIndex::find(const std::string& url) const {
  auto it = by_url_.find(url);
  return it == by_url_.end() ? nullptr : &docs_[it->second];
}

double bm25_idf(std::size_t num_docs, std::size_t df) {
  double n = static_cast<double>(num_docs), f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

std::vector<std::string> query_terms(const Query& q) {
  std::vector<std::string> terms;
  std::set<std::string> seen;
  auto add = [&](const std::string& token) {
    for (auto& t : index_terms(token))
      if (seen.insert(t).second) terms.push_back(t);
  };
  for (const auto& t : q.body_tokens) add(t);
  for (const auto& group : q.or_group)
    for (const auto& w : group) add(w);
  return terms;
}

std::vector<ScoredDoc> score_offline(const OfflineCorpusIndex& index, const Query& q, const Bm25Params& params) {
  std::map<std::uint32_t, double> acc;
  const double avg = index.average_length() > 0 ? index.average_length() : 1.0;
  for (const auto& term : query_terms(q)) {
    const auto* plist = index.postings(term);
    if (!plist) continue;
    double idf = bm25_idf(index.size(), plist->size());
    for (const auto& p : *plist) {
      if (!(index.documents()[p.doc].publish_date < q.date_cutoff)) continue;
      double tf = p.tf;
      double norm = 1.0 - params.b + params.b * index.doc_length(p.doc) / avg;
      acc[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
    }
  }
  std::vector<ScoredDoc> out;
  out.reserve(acc.size());
  for (const auto& [doc, score] : acc) out.push_back({doc, score});
  const auto& docs = index.documents();
  std::sort(out.begin(), out.end(), [&](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return docs[a.doc].url < docs[b.doc].url;
  });
  return out;
}

std::vector<SearchResult> rank_offline(const OfflineCorpusIndex& index, const Query& q, std::size_t k,
                                       const Bm25Params& params) {
  auto scored = score_offline(index, q, params);
  std::vector<SearchResult> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i)
    out.push_back({index.documents()[scored[i].doc].url, static_cast<int>(i + 1), "offline"});
  return out;
}

std::vector<ArticleDoc> SearchBackend::fetch_all(const std::vector<SearchResult>& results) {
  std::vector<ArticleDoc> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(fetch(r));
  return out;
}

OfflineBackend::OfflineBackend(std::shared_ptr<const OfflineCorpusIndex> index, Bm25Params params)
    : index_(std::move(index)), params_(params) {}

BackendCapabilities OfflineBackend::capabilities() const { return {"offline", true}; }

std::vector<SearchResult> OfflineBackend::query(const Query& q, std::size_t offset, std::size_t count) {
  auto all = rank_offline(*index_, q, offset + count, params_);
  if (offset >= all.size()) return {};
  return {all.begin() + static_cast<std::ptrdiff_t>(offset), all.end()};
}

ArticleDoc OfflineBackend::fetch(const SearchResult& r) {
  ArticleDoc doc;
  doc.url = r.url;
  doc.retrieved_rank = r.rank;
  if (const auto* d = index_->find(r.url)) {
    doc.title = collapse_ws(d->title);
    for (const auto& p : d->paragraphs) {
      std::string c = collapse_ws(p);
      if (!c.empty()) doc.paragraphs.push_back(c);
    }
    doc.fetch_date = d->publish_date.iso() + "T00:00:00Z";
  }
  refresh_emptiness(doc);
  return doc;
}

std::vector<ArticleDoc> search(const Query& q, SearchBackend& backend, std::size_t want, int skip_through) {
  std::vector<ArticleDoc> out;
  if (want == 0) return out;
  const std::size_t page = std::max<std::size_t>(want, 10);
  std::size_t offset = skip_through > 0 ? static_cast<std::size_t>(skip_through) : 0;
  while (out.size() < want) {
    auto results = backend.query(q, offset, page);
    if (results.empty()) break;
    auto docs = backend.fetch_all(results);
    for (std::size_t i = 0; i < docs.size() && out.size() < want; ++i) {
      docs[i].retrieved_rank = results[i].rank;
      if (!docs[i].is_empty) out.push_back(std::move(docs[i]));
    }
    offset += results.size();
    if (results.size() < page) break;
  }
  return out;
}

std::vector<ArticleDoc> collect_evidence(const Query& q, SearchBackend& backend, std::size_t passes,
                                         std::size_t per_pass) {
  std::vector<ArticleDoc> out;
  std::set<std::string> seen;
  int last_rank = 0;
  for (std::size_t p = 0; p < passes; ++p) {
    auto docs = search(q, backend, per_pass, last_rank);
    for (auto& d : docs) {
      last_rank = std::max(last_rank, d.retrieved_rank);
      if (seen.insert(d.url).second) out.push_back(std::move(d));
    }
    if (docs.size() < per_pass) break;
  }
  return out;
}

std::string utc_timestamp_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace rumour
