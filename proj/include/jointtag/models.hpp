#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jointtag/crf.hpp"
#include "jointtag/diffnet.hpp"
#include "jointtag/encoders.hpp"
#include "jointtag/hyperparams.hpp"
#include "jointtag/vocabulary.hpp"

namespace jointtag {

enum class Architecture { kNer, kMd, kExtMFeat, kJoint1, kJoint2, kJMulti };

inline constexpr Architecture kAllArchitectures[] = {Architecture::kNer,    Architecture::kMd,
                                                     Architecture::kExtMFeat, Architecture::kJoint1,
                                                     Architecture::kJoint2, Architecture::kJMulti};

// "ner", "md", "ext_m_feat", "joint1", "joint2", "j_multi".
std::string architecture_name(Architecture a);
Architecture parse_architecture(const std::string& name);
bool has_ner_head(Architecture a);
bool has_md_head(Architecture a);

struct ForwardResult {
  std::vector<nn::Var> ner_scores;      // s_i (size K) when an NER head is active
  std::vector<nn::Var> md_scores;       // per-token candidate scores when MD is active
  std::vector<std::size_t> selected;    // j* per token when MD is active
  std::vector<nn::Var> md_contexts;     // vectors dotted with ma_ij
  std::vector<nn::Var> fc_last_inputs;  // inputs of FC_last
};

struct LossParts {
  nn::Var ner;  // invalid when no NER head
  nn::Var md;   // invalid when no MD head
  nn::Var total;
};

struct Prediction {
  std::vector<std::string> ner_labels;  // empty without an NER head
  std::vector<std::size_t> analyses;    // empty without an MD head
};

class Model {
 public:
  Model(Architecture arch, const HyperParams& hyper, Vocabulary vocab, std::uint64_t init_seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  Architecture architecture() const { return arch_; }
  const HyperParams& hyper() const { return hyper_; }
  const Vocabulary& vocab() const { return vocab_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }
  std::size_t num_labels() const { return vocab_.ner_labels.size(); }

  // Sizes of the representation pieces for shape checks.
  std::size_t word_repr_length() const { return word_encoder_.length(); }
  std::size_t fc_last_input_length() const;

  EncodedSentence encode(const Sentence& s) const { return encode_sentence(s, vocab_); }

  ForwardResult forward(nn::Graph& g, const EncodedSentence& s, nn::Mode mode, nn::Rng& rng) const;
  LossParts loss_parts(nn::Graph& g, const EncodedSentence& s, nn::Mode mode, nn::Rng& rng) const;
  nn::Var total_loss(nn::Graph& g, const EncodedSentence& s, nn::Mode mode, nn::Rng& rng) const {
    return loss_parts(g, s, mode, rng).total;
  }

  // Dropout off; deterministic.
  Prediction predict(const EncodedSentence& s) const;
  Prediction predict(const Sentence& s) const { return predict(encode(s)); }

  // Weights of the stacked sentence Bi-LSTMs (1 layer, or 3 for J_MULTI).
  const std::vector<nn::BiLstm>& sentence_layers() const { return layers_; }
  const AnalysisEncoder& analysis_encoder() const { return analysis_encoder_; }
  const WordEncoder& word_encoder() const { return word_encoder_; }
  const crf::CrfParams& crf_params() const { return crf_; }

 private:
  std::vector<nn::Var> md_candidates(nn::Graph& g, const EncodedToken& tok) const;

  Architecture arch_;
  HyperParams hyper_;
  Vocabulary vocab_;
  nn::ParameterStore params_;
  WordEncoder word_encoder_;
  AnalysisEncoder analysis_encoder_;
  std::vector<nn::BiLstm> layers_;
  nn::Parameter* fc_last_W_ = nullptr;
  nn::Parameter* fc_last_b_ = nullptr;
  nn::Parameter* fc_out_W_ = nullptr;
  nn::Parameter* fc_out_b_ = nullptr;
  crf::CrfParams crf_;
};

// Exact number of trainable scalars, derived from layer shapes.
std::size_t count_parameters(Architecture arch, const HyperParams& hyper, const VocabSizes& sizes);

// Model directory layout: config.txt (architecture + hyperparameters),
// vocab.txt, params.txt (checkpoint).
void save_model(const Model& model, const std::string& dir);
Model load_model(const std::string& dir);

}  // namespace jointtag
