#include "rumour/parse_ingest.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

namespace rumour {

namespace {

bool parse_positive(const std::string& s, int& out) {
  if (s.empty() || s.size() > 6) return false;
  int v = 0;
  for (char c : s) {
    if (!is_digit_ascii(c)) return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Children lists, index 0 = virtual root.
std::vector<std::vector<int>> children_of(const ParsedSentence& s) {
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(s.size()) + 1);
  for (const auto& t : s.tokens) kids[static_cast<std::size_t>(t.head)].push_back(t.index);
  return kids;
}

bool excluded_from_yield(const std::string& deprel) {
  return deprel == "punct" || deprel == "cc" || deprel == "acl:relcl";
}

void collect_yield(const ParsedSentence& s, const std::vector<std::vector<int>>& kids, int node,
                   std::vector<int>& out) {
  out.push_back(node);
  for (int c : kids[static_cast<std::size_t>(node)]) {
    if (excluded_from_yield(s.at(c).deprel)) continue;
    collect_yield(s, kids, c, out);
  }
}

bool equals_ci(const std::string& a, const std::string& b) { return to_lower(a) == to_lower(b); }

}  // namespace

void validate_parse(const ParsedSentence& s, std::size_t first_line) {
  const int n = s.size();
  if (n == 0) throw MalformedParse(first_line, "empty sentence '" + s.sentence_id + "'");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1)
      throw MalformedParse(first_line, "token indices not contiguous in '" + s.sentence_id + "'");
    if (t.head < 0 || t.head > n)
      throw MalformedParse(first_line, "head " + std::to_string(t.head) + " out of range in '" +
                                           s.sentence_id + "'");
    if (t.head == t.index)
      throw MalformedParse(first_line, "token is its own head in '" + s.sentence_id + "'");
    if (t.deprel.empty())
      throw MalformedParse(first_line, "empty deprel in '" + s.sentence_id + "'");
    if (t.head == 0) ++roots;
  }
  if (roots != 1)
    throw MalformedParse(first_line, std::to_string(roots) + " roots in '" + s.sentence_id + "'");
  // Every token must reach the root within n steps.
  for (const auto& t : s.tokens) {
    int cur = t.index;
    int steps = 0;
    while (cur != 0) {
      cur = s.at(cur).head;
      if (++steps > n) throw MalformedParse(first_line, "cycle in head graph of '" + s.sentence_id + "'");
    }
  }
}

ParseMap read_parses(std::istream& in, std::vector<MalformedParse>* problems) {
  ParseMap out;
  std::string line;
  std::size_t line_no = 0;

  ParsedSentence cur;
  std::vector<std::size_t> token_lines;
  std::string fallback_id;
  std::size_t block_start = 0;
  std::optional<MalformedParse> block_error;

  auto finish = [&] {
    if (block_start == 0) return;
    if (cur.sentence_id.empty()) cur.sentence_id = fallback_id;
    try {
      if (block_error) throw *block_error;
      if (cur.sentence_id.empty()) throw MalformedParse(block_start, "sentence without id");
      for (std::size_t i = 0; i < cur.tokens.size(); ++i)
        if (cur.tokens[i].head > cur.size())
          throw MalformedParse(token_lines[i], "head " + std::to_string(cur.tokens[i].head) +
                                                   " out of range in '" + cur.sentence_id + "'");
      validate_parse(cur, block_start);
      if (out.count(cur.sentence_id))
        throw MalformedParse(block_start, "duplicate sentence id '" + cur.sentence_id + "'");
      std::string id = cur.sentence_id;
      out.emplace(id, std::move(cur));
    } catch (const MalformedParse& e) {
      if (!problems) throw;
      problems->push_back(e);
    }
    cur = ParsedSentence{};
    token_lines.clear();
    fallback_id.clear();
    block_start = 0;
    block_error.reset();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty()) {
      finish();
      continue;
    }
    if (block_start == 0) block_start = line_no;
    if (t[0] == '#') {
      auto eq = t.find('=');
      if (eq != std::string::npos) {
        std::string key = trim(t.substr(1, eq - 1));
        std::string value = trim(t.substr(eq + 1));
        if (key == "sent_id") cur.sentence_id = value;
        if (key == "id") fallback_id = value;
      }
      continue;
    }
    if (block_error) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 10) {
      block_error = MalformedParse(line_no, "expected 10 columns, got " + std::to_string(cols.size()));
      continue;
    }
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos) continue;
    ParseToken tok;
    if (!parse_positive(cols[0], tok.index) || tok.index < 1) {
      block_error = MalformedParse(line_no, "bad token index '" + cols[0] + "'");
      continue;
    }
    if (!parse_positive(cols[6], tok.head)) {
      block_error = MalformedParse(line_no, "bad head '" + cols[6] + "'");
      continue;
    }
    tok.surface = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.deprel = cols[7];
    int expected = cur.size() + 1;
    if (tok.index != expected) {
      block_error = MalformedParse(
          line_no, tok.index < expected ? "duplicated token index " + cols[0]
                                        : "token index " + cols[0] + " skips " + std::to_string(expected));
      continue;
    }
    cur.tokens.push_back(std::move(tok));
    token_lines.push_back(line_no);
  }
  finish();

  return out;
}

ParseMap read_parses(const std::string& path, std::vector<MalformedParse>* problems) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open parse file '" + path + "'");
  return read_parses(in, problems);
}

const std::set<std::string>& query_relations() {
  static const std::set<std::string> kRelations = {
      "obl:npmod", "compound", "advcl", "nummod", "acl:relcl",
      "nsubj:pass", "acl", "amod", "aux:pass"};
  return kRelations;
}

std::vector<int> retain_by_deprel(const ParsedSentence& s, const std::set<std::string>& relations) {
  std::set<int> keep;
  for (const auto& t : s.tokens) {
    if (!relations.count(t.deprel)) continue;
    keep.insert(t.index);
    if ((t.deprel == "compound" || t.deprel == "amod" || t.deprel == "nummod") && t.head > 0)
      keep.insert(t.head);
  }
  return {keep.begin(), keep.end()};
}

std::vector<Triple> extract_triples(const ParsedSentence& s) {
  std::vector<Triple> out;
  if (s.tokens.empty()) return out;
  auto kids = children_of(s);
  for (const auto& head : s.tokens) {
    const auto& deps = kids[static_cast<std::size_t>(head.index)];
    bool copular = std::any_of(deps.begin(), deps.end(),
                               [&](int c) { return s.at(c).deprel == "cop"; });
    if (head.upos != "VERB" && !copular) continue;

    int subject_root = 0;
    for (int c : deps) {
      const auto& rel = s.at(c).deprel;
      if (rel == "nsubj" || rel == "nsubj:pass") {
        subject_root = c;
        break;
      }
    }
    if (subject_root == 0) continue;

    Triple t;
    collect_yield(s, kids, subject_root, t.subject);
    t.predicate.push_back(head.index);
    for (int c : deps) {
      const auto& rel = s.at(c).deprel;
      if (rel == "aux" || rel == "aux:pass" || rel == "cop" || rel == "compound:prt")
        t.predicate.push_back(c);
      else if (rel == "obj" || rel == "iobj" || rel == "ccomp" || rel == "xcomp" || rel == "obl" ||
               rel.starts_with("obl:"))
        collect_yield(s, kids, c, t.object);
    }
    std::sort(t.subject.begin(), t.subject.end());
    std::sort(t.predicate.begin(), t.predicate.end());
    std::sort(t.object.begin(), t.object.end());
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<int> match_span(const ParsedSentence& s, const std::vector<std::string>& words,
                            const std::set<int>& used) {
  std::vector<int> out;
  std::set<int> taken = used;
  const int n = s.size();
  std::size_t pos = 0;
  int last_end = 1;
  while (pos < words.size()) {
    int best_len = 0, best_start = 0;
    bool best_after = false;
    for (int start = 1; start <= n; ++start) {
      int len = 0;
      while (pos + static_cast<std::size_t>(len) < words.size() && start + len <= n &&
             !taken.count(start + len) &&
             equals_ci(s.at(start + len).surface, words[pos + static_cast<std::size_t>(len)]))
        ++len;
      if (len == 0) continue;
      bool after = start >= last_end;
      if (len > best_len || (len == best_len && after && !best_after)) {
        best_len = len;
        best_start = start;
        best_after = after;
      }
    }
    if (best_len == 0) return {};
    for (int i = 0; i < best_len; ++i) {
      out.push_back(best_start + i);
      taken.insert(best_start + i);
    }
    pos += static_cast<std::size_t>(best_len);
    last_end = best_start + best_len;
  }
  std::sort(out.begin(), out.end());
  return out;
}

TripleMap read_triples(std::istream& in, const ParseMap& parses, std::vector<SpanNotFound>* problems) {
  TripleMap out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cols = split_tabs(line);
    std::string id = cols.empty() ? std::string() : trim(cols[0]);
    try {
      if (cols.size() < 3 || cols.size() > 4) throw SpanNotFound(id, "line");
      auto it = parses.find(id);
      if (it == parses.end()) throw SpanNotFound(id, "id");
      const ParsedSentence& s = it->second;

      Triple t;
      std::set<int> used;
      const char* names[] = {"subject", "predicate", "object"};
      std::vector<int>* slots[] = {&t.subject, &t.predicate, &t.object};
      for (std::size_t f = 0; f < 3; ++f) {
        std::vector<std::string> words =
            f + 1 < cols.size() ? split_ws(cols[f + 1]) : std::vector<std::string>{};
        if (words.empty()) {
          if (f < 2) throw SpanNotFound(id, names[f]);
          continue;
        }
        *slots[f] = match_span(s, words, used);
        if (slots[f]->empty()) throw SpanNotFound(id, names[f]);
        used.insert(slots[f]->begin(), slots[f]->end());
      }
      out[id].push_back(std::move(t));
    } catch (const SpanNotFound& e) {
      if (!problems) throw;
      problems->push_back(e);
    }
  }
  return out;
}

TripleMap read_triples(const std::string& path, const ParseMap& parses,
                       std::vector<SpanNotFound>* problems) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open triple file '" + path + "'");
  return read_triples(in, parses, problems);
}

std::vector<int> triple_token_union(const std::vector<Triple>& triples) {
  std::set<int> all;
  for (const auto& t : triples) {
    all.insert(t.subject.begin(), t.subject.end());
    all.insert(t.predicate.begin(), t.predicate.end());
    all.insert(t.object.begin(), t.object.end());
  }
  return {all.begin(), all.end()};
}

std::vector<std::string> surfaces(const ParsedSentence& s, const std::vector<int>& indices) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(s.at(i).surface);
  return out;
}

}  // namespace rumour
