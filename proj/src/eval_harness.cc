#include "rumour/eval_harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <sstream>

namespace rumour {

namespace {

std::size_t idx(Label l) { return static_cast<std::size_t>(l); }

std::vector<std::string> lower_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& t : treebank_tokenize(text)) out.push_back(to_lower(t));
  return out;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::vector<FoldSpec> make_folds(const std::vector<EnrichedEntry>& entries, bool apply_quota) {
  std::vector<const EnrichedEntry*> included;
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (apply_quota && !e.complete) continue;
    if (!seen.insert(e.thread.id()).second) throw ValidationError("duplicate thread id '" + e.thread.id() + "'");
    included.push_back(&e);
  }
  std::vector<FoldSpec> folds;
  for (Event ev : kAllEvents) {
    FoldSpec f;
    f.held_out_event = ev;
    for (const auto* e : included) (e->thread.event == ev ? f.test_ids : f.train_ids).push_back(e->thread.id());
    if (f.test_ids.empty()) throw MissingEvent(ev);
    folds.push_back(std::move(f));
  }
  return folds;
}

Json to_json(const PredictionRecord& r) {
  Json j;
  j["thread_id"] = r.thread_id;
  j["pair_index"] = r.pair_index;
  j["predicted_label"] = std::string(label_name(r.predicted_label));
  j["fold"] = std::string(event_name(r.fold));
  return j;
}

PredictionRecord prediction_from_json(const Json& j) {
  PredictionRecord r;
  try {
    r.thread_id = j.at("thread_id").get<std::string>();
    r.pair_index = j.at("pair_index").get<int>();
    auto label = parse_label(j.at("predicted_label").get<std::string>());
    auto fold = parse_event(j.at("fold").get<std::string>());
    if (!label) throw ValidationError("unknown label '" + j.at("predicted_label").get<std::string>() + "'");
    if (!fold) throw ValidationError("unknown fold '" + j.at("fold").get<std::string>() + "'");
    r.predicted_label = *label;
    r.fold = *fold;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed prediction record: ") + e.what());
  }
  if (r.pair_index < 0) throw ValidationError("negative pair_index for thread '" + r.thread_id + "'");
  return r;
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records,
                       const FileHeader& header) {
  std::vector<Json> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(to_json(r));
  write_json_lines(path, header, out);
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  auto lines = read_json_lines(in);
  std::vector<PredictionRecord> out;
  for (const auto& j : lines.records) out.push_back(prediction_from_json(j));
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_predictions(in);
}

Label majority_vote(const std::vector<Label>& votes, const LabelCounts& training_counts) {
  if (votes.empty()) throw ValidationError("majority vote over no records");
  LabelCounts tally{};
  for (Label l : votes) ++tally[idx(l)];
  Label best = Label::kFalse;
  for (Label l : kAllLabels) {
    auto a = std::make_pair(tally[idx(l)], training_counts[idx(l)]);
    auto b = std::make_pair(tally[idx(best)], training_counts[idx(best)]);
    if (a > b) best = l;
  }
  return best;
}

Label majority_vote(const std::vector<PredictionRecord>& records, const LabelCounts& training_counts) {
  std::vector<Label> votes;
  votes.reserve(records.size());
  for (const auto& r : records) votes.push_back(r.predicted_label);
  return majority_vote(votes, training_counts);
}

double macro_average(const std::array<double, 3>& per_class_f1) {
  return (per_class_f1[0] + per_class_f1[1] + per_class_f1[2]) / 3.0;
}

EvalReport macro_f1(const std::vector<Label>& gold, const std::vector<Label>& predicted) {
  if (gold.size() != predicted.size()) throw LengthMismatch(gold.size(), predicted.size());
  EvalReport r;
  r.n = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) ++r.confusion[idx(gold[i])][idx(predicted[i])];
  std::array<double, 3> f1{};
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t tp = r.confusion[c][c];
    std::size_t predicted_c = 0, gold_c = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      predicted_c += r.confusion[k][c];
      gold_c += r.confusion[c][k];
    }
    ClassScores& s = r.per_class[c];
    s.precision = predicted_c == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted_c);
    s.recall = gold_c == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_c);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    f1[c] = s.f1;
  }
  r.macro_f1 = macro_average(f1);
  return r;
}

EvalReport evaluate(const std::vector<EnrichedEntry>& entries, const std::vector<FoldSpec>& folds,
                    const std::vector<PredictionRecord>& predictions) {
  std::map<std::string, const EnrichedEntry*> by_id;
  for (const auto& e : entries) by_id[e.thread.id()] = &e;
  std::map<std::string, std::vector<PredictionRecord>> by_thread;
  for (const auto& p : predictions) by_thread[p.thread_id].push_back(p);

  struct FoldResult {
    Event event;
    std::vector<Label> gold, predicted;
  };
  auto run_fold = [&](const FoldSpec& fold) {
    FoldResult res{fold.held_out_event, {}, {}};
    LabelCounts training{};
    for (const auto& id : fold.train_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ValidationError("fold references unknown thread '" + id + "'");
      ++training[idx(it->second->thread.label)];
    }
    for (const auto& id : fold.test_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw ValidationError("fold references unknown thread '" + id + "'");
      auto p = by_thread.find(id);
      if (p == by_thread.end()) throw ValidationError("no predictions for thread '" + id + "'");
      res.gold.push_back(it->second->thread.label);
      res.predicted.push_back(majority_vote(p->second, training));
    }
    return res;
  };

  std::vector<std::future<FoldResult>> pending;
  for (const auto& f : folds) pending.push_back(std::async(std::launch::async, run_fold, std::cref(f)));
  std::vector<FoldResult> results;
  for (auto& p : pending) results.push_back(p.get());

  std::vector<Label> gold, predicted;
  std::map<Event, double> per_event;
  for (const auto& r : results) {
    per_event[r.event] = macro_f1(r.gold, r.predicted).macro_f1;
    gold.insert(gold.end(), r.gold.begin(), r.gold.end());
    predicted.insert(predicted.end(), r.predicted.begin(), r.predicted.end());
  }
  EvalReport report = macro_f1(gold, predicted);
  report.per_event_f1 = std::move(per_event);
  double mean = macro_average({report.per_class[0].f1, report.per_class[1].f1, report.per_class[2].f1});
  if (std::fabs(mean - report.macro_f1) > 1e-9) throw Error("macro F1 disagrees with the per-class mean");
  return report;
}

std::string format_report(const EvalReport& report, const std::string& row_name) {
  std::vector<Event> events(kAllEvents.begin(), kAllEvents.end());
  std::sort(events.begin(), events.end(),
            [](Event a, Event b) { return event_abbrev(a) < event_abbrev(b); });
  std::ostringstream out;
  out << std::string(std::max<std::size_t>(row_name.size(), 8), ' ') << " |";
  for (Event e : events) out << pad(std::string(event_abbrev(e)), 7);
  out << " |" << pad("False", 7) << pad("True", 7) << pad("Unv", 7) << " |" << pad("MacroF1", 9) << '\n';
  out << row_name << std::string(row_name.size() < 8 ? 8 - row_name.size() : 0, ' ') << " |";
  for (Event e : events) {
    auto it = report.per_event_f1.find(e);
    out << pad(it == report.per_event_f1.end() ? "-" : fixed3(it->second), 7);
  }
  out << " |";
  for (Label l : kAllLabels) out << pad(fixed3(report.class_f1(l)), 7);
  out << " |" << pad(fixed3(report.macro_f1), 9) << '\n';
  return out.str();
}

Json report_json(const EvalReport& report) {
  Json j;
  Json events = Json::object();
  for (const auto& [e, f1] : report.per_event_f1) events[std::string(event_name(e))] = f1;
  j["per_event_f1"] = std::move(events);
  Json classes = Json::object();
  for (Label l : kAllLabels) {
    const auto& s = report.per_class[idx(l)];
    classes[std::string(label_name(l))] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  j["per_class"] = std::move(classes);
  j["macro_f1"] = report.macro_f1;
  Json confusion = Json::array();
  for (const auto& row : report.confusion) confusion.push_back(row);
  j["confusion"] = std::move(confusion);
  j["n"] = report.n;
  return j;
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kRumourOnly: return "rumour";
    case Scenario::kEvidenceOnly: return "evidence";
    case Scenario::kRumourPlusEvidence: return "rumour+evidence";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view text) {
  std::string t = to_lower(text);
  if (t == "rumour" || t == "rumour-only" || t == "rumouronly") return Scenario::kRumourOnly;
  if (t == "evidence" || t == "evidence-only" || t == "evidenceonly") return Scenario::kEvidenceOnly;
  if (t == "rumour+evidence" || t == "rumour-plus-evidence" || t == "rumourplusevidence")
    return Scenario::kRumourPlusEvidence;
  return std::nullopt;
}

std::vector<std::vector<std::string>> LexicalBaseline::documents(const EnrichedEntry& e) const {
  std::vector<std::vector<std::string>> docs;
  if (scenario_ == Scenario::kRumourOnly) {
    docs.push_back(lower_tokens(e.thread.source.text));
    return docs;
  }
  std::vector<std::string> rumour;
  if (scenario_ == Scenario::kRumourPlusEvidence) rumour = lower_tokens(e.thread.source.text);
  for (const auto& s : e.selected_sentences) {
    std::vector<std::string> d = rumour;
    for (const auto& t : s.tokens) d.push_back(to_lower(t));
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<PredictionRecord> LexicalBaseline::classify(const EnrichedEntry& entry, Event fold) const {
  if (!trained()) throw UntrainedModel();
  auto docs = documents(entry);
  if (docs.empty()) docs.push_back(scenario_ == Scenario::kRumourPlusEvidence ? lower_tokens(entry.thread.source.text)
                                                                              : std::vector<std::string>{});
  std::vector<PredictionRecord> out;
  int i = 0;
  for (const auto& doc : docs) out.push_back({entry.thread.id(), i++, classify_text(doc), fold});
  return out;
}

void LexicalBaseline::train(const std::vector<const EnrichedEntry*>& entries) {
  documents_ = 0;
  doc_counts_ = {};
  thread_counts_ = {};
  token_totals_ = {};
  token_counts_.clear();
  for (const auto* e : entries) {
    std::size_t c = idx(e->thread.label);
    ++thread_counts_[c];
    for (const auto& doc : documents(*e)) {
      ++documents_;
      ++doc_counts_[c];
      for (const auto& t : doc) {
        ++token_counts_[t][c];
        ++token_totals_[c];
      }
    }
  }
}

Label LexicalBaseline::classify_text(const std::vector<std::string>& tokens) const {
  if (!trained()) throw UntrainedModel();
  double vocab = static_cast<double>(token_counts_.size()) + 1.0;
  Label best = Label::kFalse;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (Label l : kAllLabels) {
    std::size_t c = idx(l);
    if (doc_counts_[c] == 0) continue;
    double score = std::log(static_cast<double>(doc_counts_[c]) / static_cast<double>(documents_));
    double denom = static_cast<double>(token_totals_[c]) + vocab;
    for (const auto& t : tokens) {
      auto it = token_counts_.find(t);
      double count = it == token_counts_.end() ? 0.0 : static_cast<double>(it->second[c]);
      score += std::log((count + 1.0) / denom);
    }
    if (!have || score > best_score) {
      best = l;
      best_score = score;
      have = true;
    }
  }
  return best;
}

std::vector<PredictionRecord> run_baseline(const std::vector<EnrichedEntry>& entries,
                                           const std::vector<FoldSpec>& folds, Scenario scenario) {
  std::map<std::string, const EnrichedEntry*> by_id;
  for (const auto& e : entries) by_id[e.thread.id()] = &e;
  auto lookup = [&](const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("fold references unknown thread '" + id + "'");
    return it->second;
  };
  auto run_fold = [&](const FoldSpec& fold) {
    std::vector<const EnrichedEntry*> train;
    for (const auto& id : fold.train_ids) train.push_back(lookup(id));
    LexicalBaseline model(scenario);
    model.train(train);
    std::vector<PredictionRecord> out;
    for (const auto& id : fold.test_ids) {
      auto records = model.classify(*lookup(id), fold.held_out_event);
      out.insert(out.end(), records.begin(), records.end());
    }
    return out;
  };
  std::vector<std::future<std::vector<PredictionRecord>>> pending;
  for (const auto& f : folds) pending.push_back(std::async(std::launch::async, run_fold, std::cref(f)));
  std::vector<PredictionRecord> all;
  for (auto& p : pending) {
    auto part = p.get();
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace rumour
