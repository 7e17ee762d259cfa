#include "jointtag/models.hpp"

#include <filesystem>
#include <fstream>

#include "jointtag/config.hpp"
#include "jointtag/errors.hpp"
#include "jointtag/md_head.hpp"

namespace jointtag {

std::string architecture_name(Architecture a) {
  switch (a) {
    case Architecture::kNer: return "ner";
    case Architecture::kMd: return "md";
    case Architecture::kExtMFeat: return "ext_m_feat";
    case Architecture::kJoint1: return "joint1";
    case Architecture::kJoint2: return "joint2";
    case Architecture::kJMulti: return "j_multi";
  }
  return "?";
}

Architecture parse_architecture(const std::string& name) {
  for (const Architecture a : kAllArchitectures) {
    if (architecture_name(a) == name) return a;
  }
  throw ConfigError("unknown architecture '" + name + "' (expected ner|md|ext_m_feat|joint1|joint2|j_multi)");
}

bool has_ner_head(Architecture a) { return a != Architecture::kMd; }

bool has_md_head(Architecture a) {
  return a == Architecture::kMd || a == Architecture::kJoint1 || a == Architecture::kJoint2 ||
         a == Architecture::kJMulti;
}

namespace {

WordReprConfig word_config(Architecture arch, const HyperParams& h) {
  WordReprConfig c;
  c.use_char = true;
  c.use_ext_morph = arch == Architecture::kExtMFeat;
  c.w_d = h.w_d;
  c.ch_d = h.ch_d;
  c.mt_d = h.mt_d;
  c.dropout_rate = h.dropout_rate;
  return c;
}

std::size_t fc_last_inputs_for(Architecture arch, const HyperParams& h, std::size_t l) {
  switch (arch) {
    case Architecture::kJoint2: return 2 * h.p + 2 * h.mt_d;
    case Architecture::kJMulti: return 2 * h.p + l + 2 * h.mt_d;
    default: return 2 * h.p;
  }
}

}  // namespace

std::size_t count_parameters(Architecture arch, const HyperParams& h, const VocabSizes& sizes) {
  const WordReprConfig wc = word_config(arch, h);
  const std::size_t l = wc.length();
  std::size_t n = WordEncoder::parameter_count(sizes, wc);
  n += 2 * nn::lstm_parameter_count(l, h.p);
  if (arch == Architecture::kJMulti) n += 2 * 2 * nn::lstm_parameter_count(2 * h.p + l, h.p);
  if (has_ner_head(arch)) {
    const std::size_t K = sizes.ner_labels;
    n += h.p * (fc_last_inputs_for(arch, h, l) + 1);
    n += K * (h.p + 1);
    n += K * K + 2 * K;
  }
  if (has_md_head(arch)) n += AnalysisEncoder::parameter_count(sizes, h.ch_d, h.mt_d);
  return n;
}

Model::Model(Architecture arch, const HyperParams& hyper, Vocabulary vocab, std::uint64_t init_seed)
    : arch_(arch), hyper_(hyper), vocab_(std::move(vocab)) {
  hyper_.validate(has_md_head(arch));
  if (has_ner_head(arch) && vocab_.ner_labels.size() == 0) {
    throw ConfigError("NER architectures need at least one NER label in the vocabulary");
  }
  nn::Rng rng(init_seed);
  const VocabSizes sizes = VocabSizes::of(vocab_);
  word_encoder_ = WordEncoder(params_, sizes, word_config(arch, hyper_), rng);
  const std::size_t l = word_encoder_.length();
  layers_.push_back(nn::make_bilstm(params_, "sent.l1", l, hyper_.p, rng));
  if (arch == Architecture::kJMulti) {
    layers_.push_back(nn::make_bilstm(params_, "sent.l2", 2 * hyper_.p + l, hyper_.p, rng));
    layers_.push_back(nn::make_bilstm(params_, "sent.l3", 2 * hyper_.p + l, hyper_.p, rng));
  }
  if (has_md_head(arch)) {
    analysis_encoder_ = AnalysisEncoder(params_, sizes, word_encoder_.char_table(), hyper_.mt_d, rng);
  }
  if (has_ner_head(arch)) {
    const std::size_t K = vocab_.ner_labels.size();
    fc_last_W_ = &params_.add("ner.fc_last.W", hyper_.p, fc_last_input_length(), nn::Init::kGlorot, rng);
    fc_last_b_ = &params_.add("ner.fc_last.b", hyper_.p, 1, nn::Init::kZeros, rng);
    fc_out_W_ = &params_.add("ner.fc_out.W", K, hyper_.p, nn::Init::kGlorot, rng);
    fc_out_b_ = &params_.add("ner.fc_out.b", K, 1, nn::Init::kZeros, rng);
    crf_ = crf::make_crf(params_, "ner.crf", K, rng);
  }
}

std::size_t Model::fc_last_input_length() const {
  return fc_last_inputs_for(arch_, hyper_, word_encoder_.length());
}

std::vector<nn::Var> Model::md_candidates(nn::Graph& g, const EncodedToken& tok) const {
  if (tok.candidates.empty()) throw DataError("token without candidate analyses");
  std::vector<nn::Var> out;
  out.reserve(tok.candidates.size());
  for (const auto& cand : tok.candidates) out.push_back(analysis_encoder_.encode(g, cand).repr);
  return out;
}

ForwardResult Model::forward(nn::Graph& g, const EncodedSentence& s, nn::Mode mode, nn::Rng& rng) const {
  if (s.tokens.empty()) throw DataError("empty sentence");
  const std::size_t n = s.size();
  ForwardResult out;

  std::vector<nn::Var> xs;
  xs.reserve(n);
  for (const auto& tok : s.tokens) xs.push_back(word_encoder_.encode(g, tok, mode, rng));

  std::vector<nn::Var> h = nn::bilstm(g, layers_[0], xs);
  const std::vector<nn::Var> md_context = h;
  for (std::size_t layer = 1; layer < layers_.size(); ++layer) {
    std::vector<nn::Var> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = g.concat({h[i], xs[i]});
    h = nn::bilstm(g, layers_[layer], in);
  }

  std::vector<nn::Var> selected_repr;
  if (has_md_head(arch_)) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<nn::Var> cands = md_candidates(g, s.tokens[i]);
      const nn::Var scores = md::md_score_node(g, md_context[i], cands);
      const std::size_t best = md::md_select(g.value(scores));
      out.md_scores.push_back(scores);
      out.selected.push_back(best);
      out.md_contexts.push_back(md_context[i]);
      selected_repr.push_back(cands[best]);
    }
  }

  if (has_ner_head(arch_)) {
    for (std::size_t i = 0; i < n; ++i) {
      nn::Var fc_in = h[i];
      if (arch_ == Architecture::kJoint2) {
        fc_in = g.concat({h[i], selected_repr[i]});
      } else if (arch_ == Architecture::kJMulti) {
        fc_in = g.concat({h[i], xs[i], selected_repr[i]});
      }
      out.fc_last_inputs.push_back(fc_in);
      const nn::Var hidden = nn::fully_connected(g, *fc_last_W_, *fc_last_b_, nn::Activation::kTanh, fc_in);
      out.ner_scores.push_back(nn::fully_connected(g, *fc_out_W_, *fc_out_b_, nn::Activation::kNone, hidden));
    }
  }
  return out;
}

LossParts Model::loss_parts(nn::Graph& g, const EncodedSentence& s, nn::Mode mode, nn::Rng& rng) const {
  const ForwardResult f = forward(g, s, mode, rng);
  LossParts parts;
  std::vector<nn::Var> terms;
  if (has_ner_head(arch_)) {
    std::vector<int> gold;
    for (const auto& tok : s.tokens) {
      if (tok.ner_label < 0) throw DataError("token NER label missing from the label vocabulary");
      gold.push_back(tok.ner_label);
    }
    parts.ner = crf::crf_loss(g, f.ner_scores, crf_, gold);
    terms.push_back(parts.ner);
  }
  if (has_md_head(arch_)) {
    std::vector<nn::Var> md_terms;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& gold = s.tokens[i].gold_index;
      if (!gold) throw DataError("gold analysis missing from candidates; run filter-data first");
      md_terms.push_back(md::md_loss_node(g, f.md_scores[i], *gold));
    }
    parts.md = g.add_scalars(md_terms);
    terms.push_back(parts.md);
  }
  parts.total = terms.size() == 1 ? terms.front() : g.add_scalars(terms);
  return parts;
}

Prediction Model::predict(const EncodedSentence& s) const {
  nn::Graph g;
  nn::Rng unused(0);
  const ForwardResult f = forward(g, s, nn::Mode::kEval, unused);
  Prediction p;
  if (has_ner_head(arch_)) {
    const crf::Decoded d = crf::viterbi(crf::trellis_from(g, f.ner_scores, crf_));
    for (const int y : d.labels) p.ner_labels.push_back(vocab_.ner_labels.token(y));
  }
  p.analyses = f.selected;
  return p;
}

void save_model(const Model& model, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  KeyValues kv = hyper_to(model.hyper());
  kv["arch"] = architecture_name(model.architecture());
  {
    std::ofstream out(base / "config.txt");
    if (!out) throw Error("cannot write model config in '" + dir + "'");
    write_key_values(kv, out);
  }
  {
    std::ofstream out(base / "vocab.txt");
    if (!out) throw Error("cannot write vocabulary in '" + dir + "'");
    write_vocabulary(model.vocab(), out);
  }
  std::ofstream out(base / "params.txt");
  if (!out) throw Error("cannot write checkpoint in '" + dir + "'");
  model.params().save(out);
  out.flush();
  if (!out) throw Error("checkpoint write failed in '" + dir + "'");
}

Model load_model(const std::string& dir) {
  const std::filesystem::path base(dir);
  const KeyValues kv = load_key_values((base / "config.txt").string());
  std::ifstream vin(base / "vocab.txt");
  if (!vin) throw Error("cannot read vocabulary in '" + dir + "'");
  Vocabulary vocab = read_vocabulary(vin);
  const HyperParams hyper = hyper_from(kv);
  Model model(parse_architecture(get_string(kv, "arch", "")), hyper, std::move(vocab), hyper.seed);
  std::ifstream pin(base / "params.txt");
  if (!pin) throw Error("cannot read checkpoint in '" + dir + "'");
  model.params().load(pin);
  return model;
}

}  // namespace jointtag
