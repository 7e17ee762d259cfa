#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "jointtag/config.hpp"
#include "jointtag/corpus.hpp"
#include "jointtag/errors.hpp"
#include "jointtag/gradcheck_suite.hpp"
#include "jointtag/models.hpp"
#include "jointtag/synth.hpp"
#include "jointtag/trainer.hpp"

namespace jointtag::cli {
namespace {

// Keys accepted both in config files and as --flags of the same name.
const std::vector<std::pair<std::string, std::string>> kConfigKeys = {
    {"arch", "architecture(s): ner|md|ext_m_feat|joint1|joint2|j_multi (comma list for replicate)"},
    {"train", "training corpus"},
    {"dev", "development corpus"},
    {"test", "test corpus"},
    {"model_dir", "model directory (config.txt, vocab.txt, params.txt)"},
    {"n", "number of replications (replicate)"},
    {"pairs", "comparison pairs a:b,c:d (replicate; default all pairs)"},
    {"threads", "parallel replication workers"},
    {"selection", "dev selection metric: ner_f1|md_acc|ner_f1_then_md"},
    {"report", "structured JSON report path"},
    {"w_d", "word embedding size"},
    {"ch_d", "character embedding size"},
    {"mt_d", "morph tag embedding size"},
    {"p", "sentence Bi-LSTM cell size"},
    {"dropout", "dropout rate on word representations"},
    {"epochs", "training epochs"},
    {"batch_size", "sentences per Adam step"},
    {"lr", "Adam learning rate"},
    {"beta1", "Adam beta1"},
    {"beta2", "Adam beta2"},
    {"epsilon", "Adam epsilon"},
    {"seed", "random seed"},
    {"singleton_unk_rate", "probability of replacing frequency-1 training words by UNK"},
};

struct KeyedOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", config_path, "flat key = value config file");
    for (const auto& [key, help] : kConfigKeys) sub->add_option("--" + key, values[key], help);
  }

  // Config file values overridden by any flag given on the command line.
  KeyValues resolve() const {
    KeyValues kv;
    if (!config_path.empty()) kv = load_key_values(config_path);
    for (const auto& [key, value] : values) {
      if (app->count("--" + key) > 0) kv[key] = value;
    }
    return kv;
  }
};

std::string require_key(const KeyValues& kv, const std::string& key) {
  const std::string v = get_string(kv, key, "");
  if (v.empty()) throw CLI::ValidationError("--" + key, "required (flag or config key)");
  return v;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text << '\n';
}

int cmd_validate(const std::vector<std::string>& files, std::ostream& out) {
  bool clean = true;
  for (const auto& file : files) {
    const MismatchReport report = validate_gold_in_candidates(load_corpus(file));
    out << "file\t" << file << '\n';
    write_mismatch_report(report, out);
    clean = clean && report.empty();
  }
  return clean ? kOk : kDataInvalid;
}

int cmd_filter(const std::string& input, const std::string& output, std::ostream& out) {
  const Corpus corpus = load_corpus(input);
  const Corpus kept = filter_mismatched(corpus);
  write_corpus(kept, output);
  out << "sentences_in\t" << corpus.size() << '\n';
  out << "sentences_kept\t" << kept.size() << '\n';
  out << "sentences_removed\t" << corpus.size() - kept.size() << '\n';
  return kOk;
}

int cmd_train(const KeyValues& kv, std::ostream& out) {
  TrainOptions opts;
  opts.arch = parse_architecture(require_key(kv, "arch"));
  opts.hyper = hyper_from(kv);
  if (kv.count("selection")) opts.selection = parse_selection(kv.at("selection"));
  const Corpus train_corpus = load_corpus(require_key(kv, "train"));
  const Corpus dev_corpus = load_corpus(require_key(kv, "dev"));
  const std::string model_dir = require_key(kv, "model_dir");
  opts.on_epoch = [&out](const EpochRecord& r) {
    out << "epoch\t" << r.epoch << "\ttrain_loss\t" << r.train_loss;
    if (r.dev_ner_f1) out << "\tdev_ner_f1\t" << *r.dev_ner_f1;
    if (r.dev_md_acc) out << "\tdev_md_acc\t" << *r.dev_md_acc;
    out << '\n';
  };
  TrainResult result = train(train_corpus, dev_corpus, opts);
  save_model(result.model, model_dir);
  std::ofstream hist(std::filesystem::path(model_dir) / "history.txt");
  write_history(result.history, hist);
  out << "best_epoch\t" << result.history.best_epoch << '\n';
  write_eval_report(evaluate(result.model, dev_corpus), out, "dev.");
  return kOk;
}

int cmd_evaluate(const KeyValues& kv, std::ostream& out) {
  const Model model = load_model(require_key(kv, "model_dir"));
  const EvalReport report = evaluate(model, load_corpus(require_key(kv, "test")));
  out << "arch\t" << architecture_name(model.architecture()) << '\n';
  write_eval_report(report, out);
  if (kv.count("report")) write_text_file(kv.at("report"), eval_report_json(report));
  return kOk;
}

int cmd_predict(const std::string& model_dir, const std::string& input, const std::string& output,
                std::ostream& out) {
  const Model model = load_model(model_dir);
  const Corpus corpus = load_corpus(input);
  write_corpus(annotate(model, corpus), output);
  out << "sentences\t" << corpus.size() << '\n';
  return kOk;
}

int cmd_replicate(const KeyValues& kv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  for (const auto& name : split_list(require_key(kv, "arch"), ',')) {
    cfg.architectures.push_back(parse_architecture(name));
  }
  cfg.hyper = hyper_from(kv);
  cfg.replications = static_cast<std::size_t>(get_int(kv, "n", 10));
  cfg.threads = static_cast<std::size_t>(get_int(kv, "threads", 1));
  if (kv.count("selection")) cfg.selection = parse_selection(kv.at("selection"));
  if (kv.count("pairs")) {
    for (const auto& pair : split_list(kv.at("pairs"), ',')) {
      const auto parts = split_list(pair, ':');
      if (parts.size() != 2) throw ConfigError("pairs: expected a:b, got '" + pair + "'");
      cfg.pairs.emplace_back(parse_architecture(parts[0]), parse_architecture(parts[1]));
    }
  }
  cfg.train = load_corpus(require_key(kv, "train"));
  cfg.dev = load_corpus(require_key(kv, "dev"));
  cfg.test = load_corpus(require_key(kv, "test"));
  cfg.log = [&err](const std::string& line) { err << line << '\n'; };
  const ExperimentResult result = run_replications(cfg);
  write_experiment_report(result, out);
  if (kv.count("report")) write_text_file(kv.at("report"), experiment_report_json(result));
  return kOk;
}

int cmd_gradcheck(std::size_t dims, double eps, double tol, const std::string& archs, std::ostream& out) {
  std::vector<Architecture> list;
  if (archs.empty()) {
    list.assign(std::begin(kAllArchitectures), std::end(kAllArchitectures));
  } else {
    for (const auto& name : split_list(archs, ',')) list.push_back(parse_architecture(name));
  }
  bool ok = true;
  for (const Architecture a : list) {
    const ArchitectureGradCheck r = gradcheck_architecture(a, dims, eps);
    const bool pass = r.result.max_relative_error < tol;
    ok = ok && pass;
    out << architecture_name(a) << "\tmax_rel_error\t" << r.result.max_relative_error << "\tentries\t"
        << r.result.entries_checked << "\tworst\t" << r.result.worst_parameter << '[' << r.result.worst_index
        << "]\t" << (pass ? "PASS" : "FAIL") << '\n';
  }
  return ok ? kOk : kNumericFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint named entity recognition and morphological disambiguation tagger", "jointtag"};
  app.require_subcommand(1);

  std::vector<std::string> validate_files;
  auto* validate = app.add_subcommand("validate-data", "report gold analyses missing from candidates (exit 2 if any)");
  validate->add_option("files", validate_files, "corpus files")->required();

  std::string filter_in, filter_out;
  auto* filter = app.add_subcommand("filter-data", "drop sentences containing a gold/candidate mismatch");
  filter->add_option("--input", filter_in, "input corpus")->required();
  filter->add_option("--output", filter_out, "filtered corpus")->required();

  KeyedOptions train_opts, eval_opts, repl_opts;
  auto* train_cmd = app.add_subcommand("train", "train one model and keep the best dev epoch");
  train_opts.attach(train_cmd);
  auto* eval_cmd = app.add_subcommand("evaluate", "score a saved model on a corpus");
  eval_opts.attach(eval_cmd);
  auto* repl_cmd = app.add_subcommand("replicate", "n independent trainings per architecture with Welch t-tests");
  repl_opts.attach(repl_cmd);

  std::string pred_model, pred_in, pred_out;
  auto* predict = app.add_subcommand("predict", "append predicted NER and analysis columns to a corpus");
  predict->add_option("--model_dir", pred_model, "model directory")->required();
  predict->add_option("--input", pred_in, "input corpus")->required();
  predict->add_option("--output", pred_out, "annotated output corpus")->required();

  std::size_t gc_dims = 4;
  double gc_eps = 1e-4, gc_tol = 1e-4;
  std::string gc_arch;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every architecture (exit 3 on failure)");
  gradcheck->add_option("--dims", gc_dims, "all dimension sizes")->capture_default_str();
  gradcheck->add_option("--eps", gc_eps, "finite-difference step")->capture_default_str();
  gradcheck->add_option("--tol", gc_tol, "maximum relative error")->capture_default_str();
  gradcheck->add_option("--arch", gc_arch, "comma list (default: all)");

  SyntheticSpec spec;
  std::string synth_dir;
  auto* synth = app.add_subcommand("synth", "generate train/dev/test synthetic corpora");
  synth->add_option("--out_dir", synth_dir, "output directory")->required();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--train_sentences", spec.train_sentences)->capture_default_str();
  synth->add_option("--dev_sentences", spec.dev_sentences)->capture_default_str();
  synth->add_option("--test_sentences", spec.test_sentences)->capture_default_str();
  synth->add_option("--common_roots", spec.common_roots)->capture_default_str();
  synth->add_option("--proper_roots", spec.proper_roots)->capture_default_str();
  synth->add_option("--verbs", spec.verbs)->capture_default_str();
  synth->add_option("--particles_per_case", spec.particles_per_case)->capture_default_str();
  synth->add_option("--num_cases", spec.num_cases)->capture_default_str();
  synth->add_option("--ambiguity", spec.ambiguity, "candidates per noun")->capture_default_str();
  synth->add_option("--min_phrases", spec.min_phrases)->capture_default_str();
  synth->add_option("--max_phrases", spec.max_phrases)->capture_default_str();
  synth->add_option("--entity_rate", spec.entity_rate)->capture_default_str();
  synth->add_option("--multiword_rate", spec.multiword_rate)->capture_default_str();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_files, out);
    if (*filter) return cmd_filter(filter_in, filter_out, out);
    if (*train_cmd) return cmd_train(train_opts.resolve(), out);
    if (*eval_cmd) return cmd_evaluate(eval_opts.resolve(), out);
    if (*predict) return cmd_predict(pred_model, pred_in, pred_out, out);
    if (*repl_cmd) return cmd_replicate(repl_opts.resolve(), out, err);
    if (*gradcheck) return cmd_gradcheck(gc_dims, gc_eps, gc_tol, gc_arch, out);
    if (*synth) {
      write_synthetic(generate_synthetic(spec), synth_dir);
      out << "wrote\t" << synth_dir << '\n';
      return kOk;
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const LoadError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataInvalid;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace jointtag::cli
