#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rumour/common.h"
#include "rumour/dataset_assembly.h"
#include "rumour/json_io.h"

namespace rumour {

class MissingEvent : public Error {
 public:
  explicit MissingEvent(Event e)
      : Error("no included threads for event '" + std::string(event_name(e)) + "'"), event_(e) {}
  Event event() const { return event_; }

 private:
  Event event_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t gold, std::size_t predicted)
      : Error("gold has " + std::to_string(gold) + " labels, predictions have " + std::to_string(predicted)) {}
};

class UntrainedModel : public Error {
 public:
  UntrainedModel() : Error("baseline model used before training") {}
};

struct FoldSpec {
  Event held_out_event = Event::kCharlieHebdo;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// One fold per event, in event order. With apply_quota only complete
// entries are included.
std::vector<FoldSpec> make_folds(const std::vector<EnrichedEntry>& entries, bool apply_quota = true);

struct PredictionRecord {
  std::string thread_id;
  int pair_index = 0;
  Label predicted_label = Label::kUnverified;
  Event fold = Event::kCharlieHebdo;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

Json to_json(const PredictionRecord& r);
PredictionRecord prediction_from_json(const Json& j);
void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records,
                       const FileHeader& header);
std::vector<PredictionRecord> read_predictions(std::istream& in);
std::vector<PredictionRecord> read_predictions(const std::string& path);

using LabelCounts = std::array<std::size_t, 3>;  // indexed by Label

// Plurality label. Ties go to the label more frequent in training, then to
// declaration order (False, True, Unverified).
Label majority_vote(const std::vector<PredictionRecord>& records, const LabelCounts& training_counts);
Label majority_vote(const std::vector<Label>& votes, const LabelCounts& training_counts);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::map<Event, double> per_event_f1;
  std::array<ClassScores, 3> per_class{};  // indexed by Label
  double macro_f1 = 0.0;
  // confusion[gold][predicted]
  std::array<std::array<std::size_t, 3>, 3> confusion{};
  std::size_t n = 0;

  double class_f1(Label l) const { return per_class[static_cast<std::size_t>(l)].f1; }
};

// Unweighted mean of the three per-class F1 values.
double macro_average(const std::array<double, 3>& per_class_f1);

// Per-class precision, recall and F1 (zero when a denominator is zero) and
// their macro average. per_event_f1 stays empty.
EvalReport macro_f1(const std::vector<Label>& gold, const std::vector<Label>& predicted);

// Votes each test thread's records down to one label and scores every fold
// separately (per_event_f1) and all folds pooled (per-class, macro).
EvalReport evaluate(const std::vector<EnrichedEntry>& entries, const std::vector<FoldSpec>& folds,
                    const std::vector<PredictionRecord>& predictions);

// Columns follow the event abbreviations in alphabetical order.
std::string format_report(const EvalReport& report, const std::string& row_name = "Baseline");
Json report_json(const EvalReport& report);

enum class Scenario { kRumourOnly, kEvidenceOnly, kRumourPlusEvidence };

std::string_view scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view text);

// Multinomial naive Bayes over lowercased tokens: maximum-likelihood label
// priors plus add-one smoothed per-class token likelihoods. Labels absent
// from training are never predicted.
class LexicalBaseline {
 public:
  explicit LexicalBaseline(Scenario scenario) : scenario_(scenario) {}

  void train(const std::vector<const EnrichedEntry*>& entries);
  bool trained() const { return documents_ > 0; }
  const LabelCounts& training_counts() const { return thread_counts_; }

  Label classify_text(const std::vector<std::string>& tokens) const;
  // One record per selected sentence, or a single record for kRumourOnly.
  // An entry without sentences gets one record from the rumour alone
  // (kRumourPlusEvidence) or from the priors alone (kEvidenceOnly).
  std::vector<PredictionRecord> classify(const EnrichedEntry& entry, Event fold) const;

 private:
  std::vector<std::vector<std::string>> documents(const EnrichedEntry& e) const;

  Scenario scenario_;
  std::size_t documents_ = 0;
  LabelCounts doc_counts_{};
  LabelCounts thread_counts_{};
  std::array<std::size_t, 3> token_totals_{};
  std::unordered_map<std::string, std::array<std::size_t, 3>> token_counts_;
};

// Trains one baseline per fold on its training ids and predicts its test ids.
std::vector<PredictionRecord> run_baseline(const std::vector<EnrichedEntry>& entries,
                                           const std::vector<FoldSpec>& folds, Scenario scenario);

}  // namespace rumour
