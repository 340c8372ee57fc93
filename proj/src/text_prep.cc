#include "rumour/text_prep.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rumour {

namespace {

constexpr std::array<std::string_view, 10> kLeadPunct = {
    "(", "[", "{", "\"", "'", "`", "\xE2\x80\x9C" /* “ */, "\xE2\x80\x98" /* ‘ */,
    "\xC2\xAB" /* « */, "\xC2\xBF" /* ¿ */};

constexpr std::array<std::string_view, 15> kTrailPunct = {
    ".", ",", ";", ":", "!", "?", ")", "]", "}", "\"", "'",
    "\xE2\x80\x9D" /* ” */, "\xE2\x80\x99" /* ’ */, "\xC2\xBB" /* » */,
    "\xE2\x80\xA6" /* … */};

constexpr std::array<std::string_view, 6> kClitics = {"'s", "'re", "'ve", "'ll", "'d", "'m"};

bool is_clitic(std::string_view s) {
  std::string l = to_lower(s);
  if (l == "n't") return true;
  return std::find(kClitics.begin(), kClitics.end(), l) != kClitics.end();
}

template <std::size_t N>
std::string_view match_prefix(std::string_view s, const std::array<std::string_view, N>& set) {
  for (auto p : set)
    if (s.starts_with(p)) return p;
  return {};
}

template <std::size_t N>
std::string_view match_suffix(std::string_view s, const std::array<std::string_view, N>& set) {
  for (auto p : set)
    if (s.ends_with(p)) return p;
  return {};
}

void split_contraction(std::string_view s, std::vector<std::string>& out) {
  std::string l = to_lower(s);
  if (l.size() > 3 && l.ends_with("n't")) {
    out.emplace_back(s.substr(0, s.size() - 3));
    out.emplace_back(s.substr(s.size() - 3));
    return;
  }
  auto apos = s.rfind('\'');
  if (apos != std::string_view::npos && apos > 0) {
    std::string suffix = to_lower(s.substr(apos));
    if (std::find(kClitics.begin(), kClitics.end(), suffix) != kClitics.end()) {
      out.emplace_back(s.substr(0, apos));
      out.emplace_back(s.substr(apos));
      return;
    }
  }
  out.emplace_back(s);
}

void tokenize_chunk(std::string_view s, std::vector<std::string>& out) {
  if (s.empty()) return;
  if (is_clitic(s)) {
    out.emplace_back(s);
    return;
  }
  std::vector<std::string> lead;
  while (!s.empty() && !is_clitic(s)) {
    auto p = match_prefix(s, kLeadPunct);
    if (p.empty() || p.size() == s.size()) break;
    lead.emplace_back(p);
    s.remove_prefix(p.size());
  }
  std::vector<std::string> trail;  // collected back to front
  while (!s.empty() && !is_clitic(s)) {
    // A run of two or more periods is one token.
    std::size_t dots = 0;
    while (dots < s.size() && s[s.size() - 1 - dots] == '.') ++dots;
    if (dots >= 2) {
      if (dots == s.size()) break;
      trail.emplace_back(s.substr(s.size() - dots));
      s.remove_suffix(dots);
      continue;
    }
    auto p = match_suffix(s, kTrailPunct);
    if (p.empty() || p.size() == s.size()) break;
    if (p == ".") {
      std::string_view core = s.substr(0, s.size() - 1);
      // Abbreviations ("U.S.") and initials ("J.") keep their period.
      if (core.find('.') != std::string_view::npos) break;
      if (core.size() == 1 && is_alpha_ascii(core[0])) break;
    }
    trail.emplace_back(p);
    s.remove_suffix(p.size());
  }
  for (auto& t : lead) out.push_back(std::move(t));
  if (!s.empty()) {
    if (is_clitic(s))
      out.emplace_back(s);
    else
      split_contraction(s, out);
  }
  for (auto it = trail.rbegin(); it != trail.rend(); ++it) out.push_back(std::move(*it));
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_ascii_alnum(char c) { return is_alpha_ascii(c) || is_digit_ascii(c) || c == '_'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Cuts every URL out of `text`, replacing it with a space.
std::string strip_urls(std::string_view text, std::vector<std::string>& urls) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool at_url = starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
                  (starts_with_ci(text, i, "www.") && (i == 0 || !is_ascii_alnum(text[i - 1])));
    if (at_url) {
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j])) ++j;
      urls.emplace_back(text.substr(i, j - i));
      out += ' ';
      i = j;
      continue;
    }
    out += text[i++];
  }
  return out;
}

bool is_pure_hashtag(std::string_view chunk) {
  if (chunk.size() < 2 || chunk[0] != '#') return false;
  return std::all_of(chunk.begin() + 1, chunk.end(), is_word_byte);
}

}  // namespace

std::vector<std::string> treebank_tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& chunk : split_ws(text)) tokenize_chunk(chunk, out);
  return out;
}

std::vector<std::string> extract_urls(std::string_view text) {
  std::vector<std::string> urls;
  strip_urls(text, urls);
  return urls;
}

PreprocessedTweet preprocess(const RawTweet& raw) {
  PreprocessedTweet out;
  out.source_id = raw.id;
  out.date_cutoff = raw.created_at;

  std::string cleaned = strip_urls(raw.text, out.extracted_urls);
  std::vector<std::string> chunks = split_ws(cleaned);

  std::size_t keep = chunks.size();
  while (keep > 0 && is_pure_hashtag(chunks[keep - 1])) --keep;
  for (std::size_t i = keep; i < chunks.size(); ++i)
    out.trailing_hashtags.push_back(chunks[i].substr(1));
  chunks.resize(keep);

  for (const std::string& c : chunks) {
    std::string buf;
    auto flush = [&] {
      if (!buf.empty()) tokenize_chunk(buf, out.tokens);
      buf.clear();
    };
    std::size_t i = 0;
    while (i < c.size()) {
      char ch = c[i];
      bool boundary = i == 0 || !is_word_byte(c[i - 1]);
      if ((ch == '@' || ch == '#') && boundary) {
        std::size_t j = i + 1;
        while (j < c.size() && is_word_byte(c[j])) ++j;
        if (ch == '@') {
          flush();
          out.mention_handles.push_back(c.substr(i, j - i));
          if (j > i + 1) {
            out.mention_tokens.push_back(out.tokens.size());
            out.tokens.emplace_back("user");
          }
          i = j;
          continue;
        }
        if (j > i + 1) {
          flush();
          out.inner_hashtag_tokens.push_back(out.tokens.size());
          out.tokens.push_back(c.substr(i + 1, j - i - 1));
          i = j;
          continue;
        }
      }
      buf += ch;
      ++i;
    }
    flush();
  }

  if (out.tokens.empty()) throw EmptyTweet(raw.id);
  return out;
}

SegmentationDictionary SegmentationDictionary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dictionary '" + path + "'");
  return read(in);
}

SegmentationDictionary SegmentationDictionary::read(std::istream& in) {
  SegmentationDictionary dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2)
      throw ValidationError("dictionary line " + std::to_string(line_no) + ": expected 'word<TAB>count'");
    std::uint64_t count = 0;
    for (char c : fields[1]) {
      if (!is_digit_ascii(c))
        throw ValidationError("dictionary line " + std::to_string(line_no) + ": bad count");
      count = count * 10 + static_cast<std::uint64_t>(c - '0');
    }
    dict.add(fields[0], count);
  }
  return dict;
}

void SegmentationDictionary::add(std::string_view word, std::uint64_t count) {
  std::string w = to_lower(word);
  max_len_ = std::max(max_len_, w.size());
  counts_[w] += count;
  total_ += count;
}

bool SegmentationDictionary::contains(std::string_view word) const {
  return counts_.find(to_lower(word)) != counts_.end();
}

std::uint64_t SegmentationDictionary::count(std::string_view word) const {
  auto it = counts_.find(to_lower(word));
  return it == counts_.end() ? 0 : it->second;
}

double SegmentationDictionary::log_prob(std::string_view word) const {
  double num = static_cast<double>(count(word)) + 1.0;
  double den = static_cast<double>(total_) + static_cast<double>(counts_.size());
  return std::log(num / den);
}

bool split_better(const SplitScore& a, const SplitScore& b) {
  double scale = std::max({1.0, std::abs(a.log_prob), std::abs(b.log_prob)});
  if (std::abs(a.log_prob - b.log_prob) > 1e-9 * scale) return a.log_prob > b.log_prob;
  if (a.lengths.size() != b.lengths.size()) return a.lengths.size() < b.lengths.size();
  for (std::size_t i = 0; i < a.lengths.size(); ++i)
    if (a.lengths[i] != b.lengths[i]) return a.lengths[i] > b.lengths[i];
  return false;
}

std::optional<std::vector<std::string>> segment_words(std::string_view text,
                                                      const SegmentationDictionary& dict) {
  const std::size_t n = text.size();
  if (n == 0) return std::nullopt;
  std::string lower = to_lower(text);
  std::vector<std::optional<SplitScore>> best(n + 1);
  best[n] = SplitScore{};
  for (std::size_t i = n; i-- > 0;) {
    std::size_t limit = std::min(n, i + dict.max_word_length());
    for (std::size_t j = i + 1; j <= limit; ++j) {
      if (!best[j]) continue;
      std::string_view w(lower.data() + i, j - i);
      if (!dict.contains(w)) continue;
      SplitScore cand;
      cand.log_prob = dict.log_prob(w) + best[j]->log_prob;
      cand.lengths.reserve(best[j]->lengths.size() + 1);
      cand.lengths.push_back(j - i);
      cand.lengths.insert(cand.lengths.end(), best[j]->lengths.begin(), best[j]->lengths.end());
      if (!best[i] || split_better(cand, *best[i])) best[i] = std::move(cand);
    }
  }
  if (!best[0]) return std::nullopt;
  std::vector<std::string> words;
  std::size_t pos = 0;
  for (std::size_t len : best[0]->lengths) {
    words.emplace_back(text.substr(pos, len));
    pos += len;
  }
  return words;
}

std::vector<std::string> camel_case_pieces(std::string_view tag) {
  std::vector<std::string> pieces;
  auto is_upper = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto is_lower = [](char c) { return c >= 'a' && c <= 'z'; };
  std::size_t start = 0;
  for (std::size_t i = 1; i < tag.size(); ++i) {
    char p = tag[i - 1], c = tag[i];
    bool cut = (is_lower(p) && is_upper(c)) ||
               (is_alpha_ascii(p) && is_digit_ascii(c)) ||
               (is_digit_ascii(p) && is_alpha_ascii(c)) ||
               (is_upper(p) && is_upper(c) && i + 1 < tag.size() && is_lower(tag[i + 1]));
    if (cut) {
      pieces.emplace_back(tag.substr(start, i - start));
      start = i;
    }
  }
  pieces.emplace_back(tag.substr(start));
  return pieces;
}

std::vector<std::string> segment_hashtag(std::string_view tag, const SegmentationDictionary& dict) {
  auto pieces = camel_case_pieces(tag);
  if (pieces.size() > 1) {
    std::vector<std::string> words;
    bool ok = true;
    for (const auto& piece : pieces) {
      auto seg = segment_words(piece, dict);
      if (!seg) {
        ok = false;
        break;
      }
      words.insert(words.end(), seg->begin(), seg->end());
    }
    if (ok) return words;
  }
  if (auto seg = segment_words(tag, dict)) return *seg;
  return {std::string(tag)};
}

}  // namespace rumour
