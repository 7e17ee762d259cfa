// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "jointtag/crf.hpp"
#include "jointtag/gradcheck_suite.hpp"
#include "jointtag/md_head.hpp"
#include "jointtag/metrics.hpp"
#include "jointtag/models.hpp"
#include "jointtag/synth.hpp"
#include "jointtag/trainer.hpp"
#include "test_support.hpp"

using namespace jointtag;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = Clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  if (!v.pass) ++failures;
  std::printf("criterion %d %s: %s (%.1fs)%s\n", id, name.c_str(), v.pass ? "PASS" : "FAIL", seconds_since(t0),
              v.detail.str().c_str());
  std::fflush(stdout);
}

void crf_oracle(Verdict& v) {
  const auto t0 = Clock::now();
  nn::Rng rng(2024);
  double worst = 0.0;
  std::size_t viterbi_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4, k = 1 + (trial / 4) % 4;
    const crf::Trellis t = testing::random_trellis(n, k, rng);
    const testing::Enumerated e = testing::enumerate(t);
    worst = std::max(worst, std::abs(crf::log_partition(t) - e.log_z));
    const crf::Decoded d = crf::viterbi(t);
    if (d.labels != e.best || d.score != e.best_score) ++viterbi_mismatch;
  }
  const double secs = seconds_since(t0);
  v.detail << " max|logZ-enum|=" << worst << " viterbi_mismatches=" << viterbi_mismatch;
  v.require(worst <= 1e-9, "log Z within 1e-9");
  v.require(viterbi_mismatch == 0, "Viterbi equals exhaustive argmax");
  v.require(secs < 10.0, "runtime < 10 s");
}

void gradient_suite(Verdict& v) {
  const auto t0 = Clock::now();
  for (const ArchitectureGradCheck& r : gradcheck_all(4, 1e-4)) {
    v.detail << ' ' << architecture_name(r.arch) << '=' << r.result.max_relative_error;
    v.require(r.result.max_relative_error < 1e-4, architecture_name(r.arch) + " max relative error < 1e-4");
  }
  v.require(seconds_since(t0) < 60.0, "runtime < 60 s");
}

void exact_decomposition(Verdict& v) {
  Corpus corpus = gradcheck_fixture();
  SyntheticSpec spec;
  spec.train_sentences = 20;
  spec.dev_sentences = spec.test_sentences = 0;
  for (auto& s : generate_synthetic(spec).train) corpus.push_back(s);
  std::size_t checked = 0, unequal = 0;
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    HyperParams h = HyperParams::with_dims(4);
    const Model m(Architecture::kJoint1, h, build_vocabularies(corpus), seed);
    for (const Sentence& sentence : corpus) {
      const EncodedSentence s = m.encode(sentence);
      nn::Graph g;
      nn::Rng rng(0);
      const LossParts parts = m.loss_parts(g, s, nn::Mode::kEval, rng);
      const double total = g.scalar(m.total_loss(g, s, nn::Mode::kEval, rng));
      // Standalone heads on the same context vectors.
      nn::Graph g2;
      const ForwardResult f = m.forward(g2, s, nn::Mode::kEval, rng);
      std::vector<nn::Vec> scores;
      std::vector<int> gold;
      for (std::size_t i = 0; i < s.size(); ++i) {
        scores.push_back(g2.value(f.ner_scores[i]));
        gold.push_back(s.tokens[i].ner_label);
      }
      const crf::CrfParams& c = m.crf_params();
      const double ner = crf::crf_loss(
          crf::make_trellis(scores, c.transitions->value, c.start->value.data, c.stop->value.data), gold);
      double md_sum = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        std::vector<nn::Vec> reprs;
        for (const auto& cand : s.tokens[i].candidates) reprs.push_back(m.analysis_encoder().repr(cand).ma);
        md_sum += md::md_loss(md::md_scores(g2.value(f.md_contexts[i]), reprs, *s.tokens[i].gold_index));
      }
      ++checked;
      if (g.scalar(parts.ner) != ner || g.scalar(parts.md) != md_sum || total != (0.0 + ner) + md_sum) ++unequal;
    }
  }
  v.detail << " sentences=" << checked << " not_bit_identical=" << unequal;
  v.require(unequal == 0, "total == crf_loss + sum md_loss bit-identically");

  SyntheticSpec single = spec;
  single.ambiguity = 1;
  const Corpus one = generate_synthetic(single).train;
  std::size_t nonzero = 0;
  for (const Architecture a : {Architecture::kJoint1, Architecture::kJoint2, Architecture::kJMulti}) {
    const Model m(a, HyperParams::with_dims(4), build_vocabularies(one), 4);
    for (const Sentence& sentence : one) {
      nn::Graph g;
      nn::Rng rng(0);
      if (g.scalar(m.loss_parts(g, m.encode(sentence), nn::Mode::kEval, rng).md) != 0.0) ++nonzero;
    }
  }
  v.detail << " single_candidate_nonzero_md=" << nonzero;
  v.require(nonzero == 0, "single-candidate md_loss == 0");
}

void overfit(Verdict& v) {
  SyntheticSpec spec;
  spec.train_sentences = 50;
  spec.dev_sentences = 20;
  spec.test_sentences = 10;
  const SyntheticCorpus c = generate_synthetic(spec);
  for (const Architecture a : kAllArchitectures) {
    const auto t0 = Clock::now();
    TrainOptions opts;
    opts.arch = a;
    opts.hyper = HyperParams::with_dims(10);
    opts.hyper.epochs = 50;
    opts.hyper.dropout_rate = 0.0;
    opts.hyper.learning_rate = 5e-3;
    // Checkpoint selection on the training set itself: the criterion measures fit.
    const TrainResult r = train(c.train, c.train, opts);
    const EvalReport e = evaluate(r.model, c.train);
    const double secs = seconds_since(t0);
    const std::string name = architecture_name(a);
    v.detail << ' ' << name << "(";
    if (e.ner_token_accuracy) {
      v.detail << "ner_tok=" << *e.ner_token_accuracy;
      v.require(*e.ner_token_accuracy >= 0.99, name + " train NER token accuracy >= 0.99");
    }
    if (e.md) {
      v.detail << (e.ner_token_accuracy ? " " : "") << "md=" << e.md->overall;
      v.require(e.md->overall >= 0.99, name + " train MD accuracy >= 0.99");
    }
    v.detail << ' ' << std::round(secs * 10) / 10 << "s)";
    v.require(secs < 300.0, name + " runtime < 5 min");
  }
}

void joint_advantage(Verdict& v) {
  const auto t0 = Clock::now();
  const SyntheticCorpus c = generate_synthetic(SyntheticSpec{});
  ExperimentConfig cfg;
  cfg.train = c.train;
  cfg.dev = c.dev;
  cfg.test = c.test;
  cfg.architectures = {Architecture::kNer, Architecture::kJoint2};
  cfg.replications = 5;
  const ExperimentResult r = run_replications(cfg);
  const PairComparison& cmp = r.comparisons.at(0);
  const double gain = cmp.mean_b - cmp.mean_a;
  v.detail << " ner_f1=" << cmp.mean_a << " joint2_f1=" << cmp.mean_b << " gain=" << gain;
  if (cmp.welch) v.detail << " welch_p=" << cmp.welch->p;
  v.require(gain >= 0.05, "JOINT2 - NER >= 5 F1 points");
  v.require(cmp.welch && cmp.welch->p < 0.05, "Welch p < 0.05");
  v.require(seconds_since(t0) < 1800.0, "runtime < 30 min");
}

// Student-t two-sided tail by direct quadrature of the density on a log grid.
double t_two_sided_p(double t, double df) {
  const double logc = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  const auto density = [&](double x) { return std::exp(logc - (df + 1) / 2 * std::log1p(x * x / df)); };
  const double a = std::log(std::abs(t)), b = std::log(1e8);
  const int n = 200000;
  const double hstep = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = a + i * hstep, x = std::exp(s);
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    sum += w * density(x) * x;
  }
  return 2 * sum * hstep / 3;
}

std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) kv[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return kv;
}

void protocol(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "jointtag_acceptance_protocol";
  fs::remove_all(dir);
  std::ostringstream out, err;
  int code = cli::run({"synth", "--out_dir", dir.string(), "--train_sentences", "40", "--dev_sentences", "10",
                       "--test_sentences", "20"},
                      out, err);
  v.require(code == 0, "synth");
  out.str("");
  code = cli::run({"replicate", "--arch", "ner,joint1,joint2", "--pairs", "joint2:joint1,joint2:ner", "--n", "10",
                   "--epochs", "5", "--train", (dir / "train.txt").string(), "--dev", (dir / "dev.txt").string(),
                   "--test", (dir / "test.txt").string()},
                  out, err);
  v.require(code == 0, "replicate exit 0: " + err.str());
  const auto kv = parse_report(out.str());
  v.require(kv.count("replications") && kv.at("replications") == "10", "replications = 10");
  std::size_t runs = 0;
  for (const std::string arch : {"ner", "joint1", "joint2"}) {
    double sum = 0.0;
    for (int k = 0; k < 10; ++k) {
      const std::string key = arch + ".run" + std::to_string(k) + ".ner_f1";
      if (kv.count(key)) {
        ++runs;
        sum += std::stod(kv.at(key));
      }
    }
    v.require(kv.count(arch + ".ner_f1.mean") > 0, arch + " mean reported");
    if (kv.count(arch + ".ner_f1.mean")) {
      v.require(std::abs(std::stod(kv.at(arch + ".ner_f1.mean")) - sum / 10) < 1e-5, arch + " mean consistent");
    }
    v.require(kv.count(arch + ".ner_f1.std") > 0, arch + " std reported");
  }
  v.require(runs == 30, "10 per-run values per architecture");
  for (const std::string pair : {"joint2_vs_joint1", "joint2_vs_ner"}) {
    const std::string base = "compare." + pair + ".ner_f1.";
    const bool ok = kv.count(base + "mean_a") && kv.count(base + "mean_b") &&
                    (kv.count(base + "p") || kv.count(base + "notice"));
    v.require(ok, pair + " (mean_a, mean_b, p) triple");
    if (kv.count(base + "p")) v.detail << ' ' << pair << "_p=" << kv.at(base + "p");
  }
  v.require(kv.count("compare.joint2_vs_joint1.md_acc.mean_a") > 0, "MD accuracy comparison for joint pair");
  fs::remove_all(dir);

  const std::vector<double> a{81.0, 81.3, 81.5, 81.2}, b{83.0, 83.4, 83.1, 83.3};
  const metrics::WelchResult w = metrics::welch_t_test(a, b);
  const double ma = 81.25, mb = 83.2;
  double sa = 0, sb = 0;
  for (double x : a) sa += (x - ma) * (x - ma);
  for (double x : b) sb += (x - mb) * (x - mb);
  const double va = sa / 3 / 4, vb = sb / 3 / 4;
  const double t = (ma - mb) / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / 3 + vb * vb / 3);
  const double p = t_two_sided_p(t, df);
  v.detail << " fixture t=" << w.t << " df=" << w.df << " p=" << w.p << " oracle_p=" << p;
  v.require(std::abs(w.p - p) < 1e-3, "Welch p within 1e-3 of the hand-formula oracle");
  v.require(std::abs(w.t - t) < 1e-9 && std::abs(w.df - df) < 1e-9, "Welch t and df match hand formulas");
}

std::size_t lstm_count(std::size_t in, std::size_t h) { return 4 * h * (in + h + 1); }

void parameter_footnote(Verdict& v) {
  const HyperParams h = HyperParams::with_dims(10);
  const std::size_t l = h.w_d + 2 * h.ch_d;
  const std::size_t symbolic = 2 * 2 * lstm_count(2 * h.p + l, h.p) + h.p * l;

  const auto fraction = [&](const VocabSizes& sizes, const std::string& label) {
    const std::size_t j2 = count_parameters(Architecture::kJoint2, h, sizes);
    const std::size_t jm = count_parameters(Architecture::kJMulti, h, sizes);
    v.require(jm - j2 == symbolic, label + ": J_MULTI - JOINT2 equals the symbolic count");
    const double f = static_cast<double>(jm - j2) / static_cast<double>(j2);
    v.detail << ' ' << label << ": joint2=" << j2 << " j_multi=" << jm << " fraction=" << f;
    return f;
  };
  v.detail << " delta=16p(3p+l+1)+p*l=" << symbolic;
  const SyntheticCorpus c = generate_synthetic(SyntheticSpec{});
  const double synthetic = fraction(VocabSizes::of(build_vocabularies(c.train)), "synthetic_vocab");
  // Newspaper-scale vocabulary: 60000 word types, 100 characters, 120 morph tags, 7 IOB2 labels.
  const double newspaper = fraction(VocabSizes{60000, 100, 120, 120, 7}, "newspaper_vocab");
  v.require(synthetic > 0.0 && newspaper > 0.0, "J_MULTI strictly larger");
  v.require(newspaper < 0.05, "small fraction (< 5%) at newspaper-scale vocabulary");
}

void data_tooling(Verdict& v) {
  SyntheticSpec spec;
  spec.train_sentences = 100;
  spec.dev_sentences = spec.test_sentences = 0;
  Corpus corpus = generate_synthetic(spec).train;
  Corpus clean;
  std::size_t injected = 0;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (s % 7 == 3) {
      for (auto& tok : corpus[s].tokens) {
        if (tok.candidates.size() > 1) {
          tok.candidates.erase(tok.candidates.begin() + static_cast<std::ptrdiff_t>(*tok.gold_index));
          tok.gold_index.reset();
          break;
        }
      }
      ++injected;
    } else {
      clean.push_back(corpus[s]);
    }
  }
  const fs::path dir = fs::temp_directory_path() / "jointtag_acceptance_data";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_corpus(corpus, (dir / "in.txt").string());
  std::ostringstream out, err;
  v.require(cli::run({"validate-data", (dir / "in.txt").string()}, out, err) == cli::kDataInvalid,
            "validate-data flags the mismatches");
  v.require(cli::run({"filter-data", "--input", (dir / "in.txt").string(), "--output", (dir / "once.txt").string()},
                     out, err) == 0,
            "filter-data");
  v.require(cli::run({"filter-data", "--input", (dir / "once.txt").string(), "--output",
                      (dir / "twice.txt").string()},
                     out, err) == 0,
            "filter-data twice");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  v.require(slurp(dir / "once.txt") == testing::corpus_text(clean), "clean sentences kept byte-identical");
  v.require(slurp(dir / "twice.txt") == slurp(dir / "once.txt"), "idempotent");
  v.require(cli::run({"validate-data", (dir / "once.txt").string()}, out, err) == 0, "filtered corpus validates");
  v.detail << " sentences=" << corpus.size() << " injected=" << injected << " kept=" << clean.size();
  fs::remove_all(dir);
}

}  // namespace

int main() {
  report(1, "crf_oracle_equivalence", crf_oracle);
  report(2, "gradient_suite", gradient_suite);
  report(3, "exact_decomposition", exact_decomposition);
  report(4, "overfit", overfit);
  report(5, "joint_advantage", joint_advantage);
  report(6, "protocol_fidelity", protocol);
  report(7, "parameter_count", parameter_footnote);
  report(8, "data_tooling", data_tooling);
  std::printf("acceptance: %d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
