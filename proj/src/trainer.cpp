#include "jointtag/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "jointtag/errors.hpp"

namespace jointtag {

std::string selection_name(SelectionMetric m) {
  switch (m) {
    case SelectionMetric::kNerF1: return "ner_f1";
    case SelectionMetric::kMdAcc: return "md_acc";
    case SelectionMetric::kNerF1ThenMd: return "ner_f1_then_md";
  }
  return "?";
}

SelectionMetric parse_selection(const std::string& name) {
  for (const auto m : {SelectionMetric::kNerF1, SelectionMetric::kMdAcc, SelectionMetric::kNerF1ThenMd}) {
    if (selection_name(m) == name) return m;
  }
  throw ConfigError("unknown selection metric '" + name + "' (expected ner_f1|md_acc|ner_f1_then_md)");
}

SelectionMetric default_selection(Architecture arch) {
  if (!has_ner_head(arch)) return SelectionMetric::kMdAcc;
  if (!has_md_head(arch)) return SelectionMetric::kNerF1;
  return SelectionMetric::kNerF1ThenMd;
}

std::size_t select_best(const std::vector<EpochRecord>& epochs, SelectionMetric metric) {
  if (epochs.empty()) throw DataError("select_best: empty history");
  static constexpr double kMissing = -std::numeric_limits<double>::infinity();
  const auto key = [metric](const EpochRecord& r) {
    const double f1 = r.dev_ner_f1.value_or(kMissing);
    const double md = r.dev_md_acc.value_or(kMissing);
    switch (metric) {
      case SelectionMetric::kNerF1: return std::pair{f1, 0.0};
      case SelectionMetric::kMdAcc: return std::pair{md, 0.0};
      case SelectionMetric::kNerF1ThenMd: return std::pair{f1, md};
    }
    return std::pair{kMissing, kMissing};
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    if (key(epochs[i]) > key(epochs[best])) best = i;
  }
  return best;
}

namespace {

// Scores predictions on encoded sentences against gold label strings
// (strings, so gold labels unseen in training still count as entities).
EvalReport score(const Model& model, const std::vector<EncodedSentence>& encoded,
                 const std::vector<metrics::LabelSeq>& gold_labels) {
  EvalReport r;
  const Architecture arch = model.architecture();
  std::vector<metrics::LabelSeq> pred_labels;
  std::vector<std::size_t> gold_md, pred_md, n_cands;
  for (const auto& s : encoded) {
    const Prediction p = model.predict(s);
    ++r.sentences;
    r.tokens += s.size();
    if (has_ner_head(arch)) pred_labels.push_back(p.ner_labels);
    if (has_md_head(arch)) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& gi = s.tokens[i].gold_index;
        if (!gi) throw DataError("evaluate: gold analysis missing from candidates");
        gold_md.push_back(*gi);
        pred_md.push_back(p.analyses[i]);
        n_cands.push_back(s.tokens[i].candidates.size());
      }
    }
  }
  if (has_ner_head(arch)) {
    r.ner = metrics::ner_f1(gold_labels, pred_labels);
    r.ner_token_accuracy = metrics::token_accuracy(gold_labels, pred_labels);
  }
  if (has_md_head(arch)) r.md = metrics::md_accuracy(gold_md, pred_md, n_cands);
  return r;
}

std::vector<EncodedSentence> encode_all(const Model& model, const Corpus& corpus) {
  std::vector<EncodedSentence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(model.encode(s));
  return out;
}

}  // namespace

EvalReport evaluate(const Model& model, const std::vector<EncodedSentence>& encoded) {
  std::vector<metrics::LabelSeq> gold;
  if (has_ner_head(model.architecture())) {
    for (const auto& s : encoded) {
      metrics::LabelSeq labels;
      for (const auto& tok : s.tokens) {
        if (tok.ner_label < 0) throw DataError("evaluate: gold NER label unknown to the model");
        labels.push_back(model.vocab().ner_labels.token(tok.ner_label));
      }
      gold.push_back(std::move(labels));
    }
  }
  return score(model, encoded, gold);
}

EvalReport evaluate(const Model& model, const Corpus& corpus) {
  std::vector<metrics::LabelSeq> gold;
  for (const auto& s : corpus) {
    metrics::LabelSeq labels;
    for (const auto& tok : s.tokens) labels.push_back(tok.ner_label);
    gold.push_back(std::move(labels));
  }
  return score(model, encode_all(model, corpus), gold);
}

Corpus annotate(const Model& model, const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& sentence : out) {
    const Prediction p = model.predict(model.encode(sentence));
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      Token& tok = sentence.tokens[i];
      tok.predicted_ner = p.ner_labels.empty() ? "_" : p.ner_labels[i];
      tok.predicted_analysis = p.analyses.empty() ? "_" : tok.candidates[p.analyses[i]].raw;
    }
  }
  return out;
}

TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus, const TrainOptions& options) {
  const Architecture arch = options.arch;
  const HyperParams& hyper = options.hyper;
  if (train_corpus.empty()) throw DataError("train: empty training corpus");
  if (dev_corpus.empty()) throw DataError("train: empty development corpus");
  if (has_md_head(arch)) {
    for (const Corpus* c : {&train_corpus, &dev_corpus}) {
      const MismatchReport report = validate_gold_in_candidates(*c);
      if (!report.empty()) {
        throw DataError(std::to_string(report.mismatches.size()) +
                        " tokens have a gold analysis missing from their candidates; "
                        "run `validate-data` / `filter-data` first");
      }
    }
  }

  Model model(arch, hyper, build_vocabularies(train_corpus), hyper.seed);
  const SelectionMetric metric = options.selection.value_or(default_selection(arch));

  const std::vector<EncodedSentence> train_set = encode_all(model, train_corpus);
  const std::vector<EncodedSentence> dev_set = encode_all(model, dev_corpus);
  if (has_ner_head(arch)) {
    for (const auto& s : dev_set) {
      for (const auto& t : s.tokens) {
        if (t.ner_label < 0) throw DataError("train: development corpus has an NER label absent from training");
      }
    }
  }

  std::unordered_map<int, std::size_t> word_freq;
  for (const auto& s : train_set) {
    for (const auto& t : s.tokens) ++word_freq[t.word];
  }

  nn::Rng rng(hyper.seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  std::bernoulli_distribution unk_coin(hyper.singleton_unk_rate);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  nn::ParameterStore::Snapshot best_params = model.params().snapshot();
  const nn::AdamConfig adam = hyper.adam();

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t begin = 0; begin < order.size(); begin += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), begin + hyper.batch_size);
      model.params().zero_grads();
      for (std::size_t k = begin; k < end; ++k) {
        const EncodedSentence* sentence = &train_set[order[k]];
        EncodedSentence replaced;
        if (hyper.singleton_unk_rate > 0.0) {
          bool any = false;
          for (std::size_t i = 0; i < sentence->size(); ++i) {
            const int w = sentence->tokens[i].word;
            if (w != 0 && word_freq[w] == 1 && unk_coin(rng)) {
              if (!any) replaced = *sentence;
              any = true;
              replaced.tokens[i].word = 0;
            }
          }
          if (any) sentence = &replaced;
        }
        nn::Graph g;
        const nn::Var loss = model.total_loss(g, *sentence, nn::Mode::kTrain, rng);
        rec.train_loss += g.scalar(loss);
        g.backward(loss);
      }
      nn::adam_update(model.params(), adam);
      ++rec.steps;
    }
    const EvalReport dev = evaluate(model, dev_set);
    if (dev.ner) rec.dev_ner_f1 = dev.ner->f1;
    if (dev.md) rec.dev_md_acc = dev.md->overall;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(rec);
    const std::size_t best = select_best(history.epochs, metric);
    if (best == epoch) best_params = model.params().snapshot();
    history.best_epoch = best;
    if (options.on_epoch) options.on_epoch(rec);
  }
  if (!history.epochs.empty()) model.params().restore(best_params);
  return TrainResult{std::move(model), std::move(history)};
}

ExperimentResult run_replications(const ExperimentConfig& config) {
  if (config.replications < 2) throw ConfigError("run_replications: need at least 2 replications");
  if (config.architectures.empty()) throw ConfigError("run_replications: no architectures given");

  struct Job {
    std::size_t arch_index;
    std::size_t replication;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < config.architectures.size(); ++a) {
    for (std::size_t r = 0; r < config.replications; ++r) jobs.push_back({a, r});
  }

  ExperimentResult result;
  result.replications = config.replications;
  for (const Architecture a : config.architectures) {
    ArchitectureSummary s;
    s.arch = a;
    s.runs.resize(config.replications);
    result.summaries.push_back(std::move(s));
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  const auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job job = jobs[j];
      try {
        TrainOptions opts;
        opts.arch = config.architectures[job.arch_index];
        opts.hyper = config.hyper;
        opts.hyper.seed = config.hyper.seed + job.replication;
        opts.selection = config.selection;
        TrainResult trained = train(config.train, config.dev, opts);
        // The checkpoint is frozen before the test corpus is touched.
        ReplicationRun run;
        run.arch = opts.arch;
        run.replication = job.replication;
        run.seed = opts.hyper.seed;
        run.best_epoch = trained.history.best_epoch;
        run.test = evaluate(trained.model, config.test);
        std::lock_guard<std::mutex> lock(log_mutex);
        result.summaries[job.arch_index].runs[job.replication] = run;
        if (config.log) {
          std::string line = architecture_name(run.arch) + " run " + std::to_string(run.replication) +
                             " seed " + std::to_string(run.seed) + " best_epoch " + std::to_string(run.best_epoch);
          if (run.test.ner) line += " test_f1 " + std::to_string(run.test.ner->f1);
          if (run.test.md) line += " test_md " + std::to_string(run.test.md->overall);
          config.log(line);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& s : result.summaries) {
    if (has_ner_head(s.arch)) {
      std::vector<double> v;
      for (const auto& run : s.runs) v.push_back(run.test.ner->f1);
      s.ner_f1 = metrics::RunStats::of(std::move(v));
    }
    if (has_md_head(s.arch)) {
      std::vector<double> v;
      for (const auto& run : s.runs) v.push_back(run.test.md->overall);
      s.md_accuracy = metrics::RunStats::of(std::move(v));
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const auto index_of = [&](Architecture a) {
    for (std::size_t i = 0; i < config.architectures.size(); ++i) {
      if (config.architectures[i] == a) return i;
    }
    throw ConfigError("comparison pair names architecture '" + architecture_name(a) + "' not in the experiment");
  };
  if (config.pairs.empty()) {
    for (std::size_t i = 0; i < config.architectures.size(); ++i) {
      for (std::size_t j = i + 1; j < config.architectures.size(); ++j) pairs.emplace_back(i, j);
    }
  } else {
    for (const auto& [a, b] : config.pairs) pairs.emplace_back(index_of(a), index_of(b));
  }
  for (const auto& [i, j] : pairs) {
    const ArchitectureSummary& sa = result.summaries[i];
    const ArchitectureSummary& sb = result.summaries[j];
    const auto compare = [&](const std::string& name, const std::optional<metrics::RunStats>& a,
                             const std::optional<metrics::RunStats>& b) {
      if (!a || !b) return;
      PairComparison c;
      c.a = sa.arch;
      c.b = sb.arch;
      c.metric = name;
      c.mean_a = a->mean;
      c.mean_b = b->mean;
      try {
        c.welch = metrics::welch_t_test(a->values, b->values);
      } catch (const DataError& e) {
        c.notice = std::string("t-test skipped: ") + e.what();
      }
      result.comparisons.push_back(std::move(c));
    };
    compare("ner_f1", sa.ner_f1, sb.ner_f1);
    compare("md_acc", sa.md_accuracy, sb.md_accuracy);
  }
  return result;
}

void write_eval_report(const EvalReport& r, std::ostream& out, const std::string& prefix) {
  out << prefix << "sentences\t" << r.sentences << '\n';
  out << prefix << "tokens\t" << r.tokens << '\n';
  if (r.ner) {
    out << prefix << "ner_precision\t" << r.ner->precision << '\n';
    out << prefix << "ner_recall\t" << r.ner->recall << '\n';
    out << prefix << "ner_f1\t" << r.ner->f1 << '\n';
    out << prefix << "ner_gold_entities\t" << r.ner->gold_entities << '\n';
    out << prefix << "ner_predicted_entities\t" << r.ner->predicted_entities << '\n';
    out << prefix << "ner_token_accuracy\t" << *r.ner_token_accuracy << '\n';
  }
  if (r.md) {
    out << prefix << "md_accuracy\t" << r.md->overall << '\n';
    out << prefix << "md_accuracy_ambiguous\t";
    if (r.md->ambiguous) {
      out << *r.md->ambiguous << '\n';
    } else {
      out << "absent\n";
    }
  }
}

void write_history(const TrainHistory& h, std::ostream& out) {
  for (const auto& e : h.epochs) {
    out << "epoch\t" << e.epoch << "\ttrain_loss\t" << e.train_loss;
    if (e.dev_ner_f1) out << "\tdev_ner_f1\t" << *e.dev_ner_f1;
    if (e.dev_md_acc) out << "\tdev_md_acc\t" << *e.dev_md_acc;
    out << "\tseconds\t" << e.seconds << '\n';
  }
  out << "best_epoch\t" << h.best_epoch << '\n';
}

void write_experiment_report(const ExperimentResult& r, std::ostream& out) {
  out << "replications\t" << r.replications << '\n';
  for (const auto& s : r.summaries) {
    const std::string name = architecture_name(s.arch);
    for (const auto& run : s.runs) {
      const std::string key = name + ".run" + std::to_string(run.replication);
      if (run.test.ner) out << key << ".ner_f1\t" << run.test.ner->f1 << '\n';
      if (run.test.md) out << key << ".md_acc\t" << run.test.md->overall << '\n';
    }
    if (s.ner_f1) {
      out << name << ".ner_f1.mean\t" << s.ner_f1->mean << '\n';
      if (s.ner_f1->stddev) out << name << ".ner_f1.std\t" << *s.ner_f1->stddev << '\n';
    }
    if (s.md_accuracy) {
      out << name << ".md_acc.mean\t" << s.md_accuracy->mean << '\n';
      if (s.md_accuracy->stddev) out << name << ".md_acc.std\t" << *s.md_accuracy->stddev << '\n';
    }
  }
  for (const auto& c : r.comparisons) {
    const std::string key = "compare." + architecture_name(c.a) + "_vs_" + architecture_name(c.b) + "." + c.metric;
    out << key << ".mean_a\t" << c.mean_a << '\n';
    out << key << ".mean_b\t" << c.mean_b << '\n';
    if (c.welch) {
      out << key << ".t\t" << c.welch->t << '\n';
      out << key << ".df\t" << c.welch->df << '\n';
      out << key << ".p\t" << c.welch->p << '\n';
    } else {
      out << key << ".notice\t" << c.notice << '\n';
    }
  }
}

namespace {

nlohmann::json eval_json(const EvalReport& r) {
  nlohmann::json j;
  j["sentences"] = r.sentences;
  j["tokens"] = r.tokens;
  if (r.ner) {
    j["ner"] = {{"precision", r.ner->precision},
                {"recall", r.ner->recall},
                {"f1", r.ner->f1},
                {"gold_entities", r.ner->gold_entities},
                {"predicted_entities", r.ner->predicted_entities},
                {"correct", r.ner->correct},
                {"token_accuracy", *r.ner_token_accuracy}};
  }
  if (r.md) {
    j["md"] = {{"accuracy", r.md->overall}, {"tokens", r.md->tokens}, {"ambiguous_tokens", r.md->ambiguous_tokens}};
    j["md"]["accuracy_ambiguous"] = r.md->ambiguous ? nlohmann::json(*r.md->ambiguous) : nlohmann::json(nullptr);
  }
  return j;
}

nlohmann::json stats_json(const metrics::RunStats& s) {
  nlohmann::json j{{"values", s.values}, {"mean", s.mean}};
  j["std"] = s.stddev ? nlohmann::json(*s.stddev) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

std::string eval_report_json(const EvalReport& r) { return eval_json(r).dump(2); }

std::string experiment_report_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["replications"] = r.replications;
  j["architectures"] = nlohmann::json::array();
  for (const auto& s : r.summaries) {
    nlohmann::json a;
    a["name"] = architecture_name(s.arch);
    a["runs"] = nlohmann::json::array();
    for (const auto& run : s.runs) {
      a["runs"].push_back({{"replication", run.replication},
                           {"seed", run.seed},
                           {"best_epoch", run.best_epoch},
                           {"test", eval_json(run.test)}});
    }
    if (s.ner_f1) a["ner_f1"] = stats_json(*s.ner_f1);
    if (s.md_accuracy) a["md_acc"] = stats_json(*s.md_accuracy);
    j["architectures"].push_back(std::move(a));
  }
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : r.comparisons) {
    nlohmann::json x{{"a", architecture_name(c.a)},
                     {"b", architecture_name(c.b)},
                     {"metric", c.metric},
                     {"mean_a", c.mean_a},
                     {"mean_b", c.mean_b}};
    if (c.welch) {
      x["t"] = c.welch->t;
      x["df"] = c.welch->df;
      x["p"] = c.welch->p;
    } else {
      x["notice"] = c.notice;
    }
    j["comparisons"].push_back(std::move(x));
  }
  return j.dump(2);
}

}  // namespace jointtag
