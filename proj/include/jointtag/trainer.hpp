#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jointtag/corpus.hpp"
#include "jointtag/metrics.hpp"
#include "jointtag/models.hpp"

namespace jointtag {

enum class SelectionMetric { kNerF1, kMdAcc, kNerF1ThenMd };

std::string selection_name(SelectionMetric m);
SelectionMetric parse_selection(const std::string& name);
// ner_f1 for NER-only heads, md_acc for MD, ner_f1_then_md for joint models.
SelectionMetric default_selection(Architecture arch);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> dev_ner_f1;
  std::optional<double> dev_md_acc;
  double seconds = 0.0;
  std::size_t steps = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
};

// Argmax of the metric over epochs; ties go to the earliest epoch.
std::size_t select_best(const std::vector<EpochRecord>& epochs, SelectionMetric metric);

struct EvalReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::optional<metrics::PRF> ner;
  std::optional<double> ner_token_accuracy;
  std::optional<metrics::MdAccuracy> md;
};

EvalReport evaluate(const Model& model, const Corpus& corpus);
EvalReport evaluate(const Model& model, const std::vector<EncodedSentence>& encoded);

// Copy of the corpus with predicted NER and analysis columns filled ("_" where
// the architecture has no such head). Gold NER labels are never consulted.
Corpus annotate(const Model& model, const Corpus& corpus);

struct TrainOptions {
  Architecture arch = Architecture::kNer;
  HyperParams hyper;
  std::optional<SelectionMetric> selection;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  Model model;  // parameters of the best dev epoch
  TrainHistory history;
};

// Vocabulary is built from the training corpus. Throws DataError if an MD
// architecture is given a corpus with gold/candidate mismatches.
TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus, const TrainOptions& options);

// Number of optimizer steps one epoch takes.
inline std::size_t steps_per_epoch(std::size_t sentences, std::size_t batch_size) {
  return (sentences + batch_size - 1) / batch_size;
}

struct ExperimentConfig {
  Corpus train;
  Corpus dev;
  Corpus test;
  std::vector<Architecture> architectures;
  HyperParams hyper;
  std::size_t replications = 10;
  // Empty: every pair of architectures in the given order.
  std::vector<std::pair<Architecture, Architecture>> pairs;
  std::size_t threads = 1;
  std::optional<SelectionMetric> selection;
  std::function<void(const std::string&)> log;
};

struct ReplicationRun {
  Architecture arch = Architecture::kNer;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  EvalReport test;
};

struct ArchitectureSummary {
  Architecture arch = Architecture::kNer;
  std::vector<ReplicationRun> runs;
  std::optional<metrics::RunStats> ner_f1;
  std::optional<metrics::RunStats> md_accuracy;
};

struct PairComparison {
  Architecture a = Architecture::kNer;
  Architecture b = Architecture::kNer;
  std::string metric;  // "ner_f1" or "md_acc"
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::optional<metrics::WelchResult> welch;
  std::string notice;  // set when the test was skipped
};

struct ExperimentResult {
  std::size_t replications = 0;
  std::vector<ArchitectureSummary> summaries;
  std::vector<PairComparison> comparisons;
};

// Trains each architecture n times with seeds seed+0 .. seed+n-1 and scores
// the frozen best-dev checkpoints on the test corpus.
ExperimentResult run_replications(const ExperimentConfig& config);

// "key\tvalue" lines.
void write_eval_report(const EvalReport& r, std::ostream& out, const std::string& prefix = "");
void write_experiment_report(const ExperimentResult& r, std::ostream& out);
void write_history(const TrainHistory& h, std::ostream& out);
// Structured JSON forms.
std::string eval_report_json(const EvalReport& r);
std::string experiment_report_json(const ExperimentResult& r);

}  // namespace jointtag
