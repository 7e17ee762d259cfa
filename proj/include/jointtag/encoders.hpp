#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "jointtag/corpus.hpp"
#include "jointtag/diffnet.hpp"
#include "jointtag/vocabulary.hpp"

namespace jointtag {

// Id-level view of an analysis: root characters (char map), whole tags
// (morphtag map) and every character of the raw string (analysis-char map).
struct EncodedAnalysis {
  std::vector<int> root_chars;
  std::vector<int> tags;
  std::vector<int> chars;
};

struct EncodedToken {
  int word = 0;
  std::vector<int> chars;
  EncodedAnalysis gold;
  std::vector<EncodedAnalysis> candidates;
  std::optional<std::size_t> gold_index;
  int ner_label = -1;  // -1 when the label is not in the vocabulary
};

struct EncodedSentence {
  std::vector<EncodedToken> tokens;
  std::size_t size() const { return tokens.size(); }
};

EncodedAnalysis encode_analysis(const MorphAnalysis& a, const Vocabulary& vocab);
EncodedSentence encode_sentence(const Sentence& s, const Vocabulary& vocab);

struct VocabSizes {
  std::size_t words = 1;
  std::size_t chars = 1;
  std::size_t morphtags = 1;
  std::size_t analysis_chars = 1;
  std::size_t ner_labels = 1;

  static VocabSizes of(const Vocabulary& v) {
    return {v.words.size(), v.chars.size(), v.morphtags.size(), v.analysis_chars.size(),
            v.ner_labels.size()};
  }
};

// Bi-LSTM over a sequence of element embeddings, reduced to
// concat(forward output at the last position, backward output at the first).
nn::Var encode_unit(nn::Graph& g, const nn::BiLstm& net, std::span<const nn::Var> elements, bool apply_relu);
nn::Vec encode_unit(const nn::BiLstm& net, const std::vector<nn::Vec>& elements, bool apply_relu);

struct WordReprConfig {
  bool use_char = true;
  bool use_ext_morph = false;  // characters of the gold analysis as an extra channel
  std::size_t w_d = 10;
  std::size_t ch_d = 10;
  std::size_t mt_d = 10;
  double dropout_rate = 0.0;

  std::size_t length() const {
    return w_d + (use_char ? 2 * ch_d : 0) + (use_ext_morph ? 2 * mt_d : 0);
  }
};

// Word representation x_i = [word embedding; surface chars; (gold analysis chars)],
// with dropout on the concatenation in train mode.
class WordEncoder {
 public:
  WordEncoder() = default;
  WordEncoder(nn::ParameterStore& store, const VocabSizes& sizes, const WordReprConfig& config, nn::Rng& rng);

  nn::Var encode(nn::Graph& g, const EncodedToken& token, nn::Mode mode, nn::Rng& rng) const;
  const WordReprConfig& config() const { return config_; }
  std::size_t length() const { return config_.length(); }
  nn::Parameter& char_table() const { return *char_table_; }

  static std::size_t parameter_count(const VocabSizes& sizes, const WordReprConfig& config);

 private:
  WordReprConfig config_;
  nn::Parameter* word_table_ = nullptr;
  nn::Parameter* char_table_ = nullptr;
  nn::BiLstm char_lstm_;
  nn::Parameter* ext_table_ = nullptr;
  nn::BiLstm ext_lstm_;
};

struct AnalysisNodes {
  nn::Var root;  // r
  nn::Var tags;  // ms
  nn::Var repr;  // ma = tanh(r + ms)
};

struct AnalysisRepr {
  nn::Vec r;
  nn::Vec ms;
  nn::Vec ma;
};

// Candidate analysis representation: root characters through a Bi-LSTM of
// cell size mt_d (sharing the surface character table), tag ids through
// another, both with RELU; ma = tanh(r + ms). An empty tag list gives ms = 0.
class AnalysisEncoder {
 public:
  AnalysisEncoder() = default;
  AnalysisEncoder(nn::ParameterStore& store, const VocabSizes& sizes, nn::Parameter& char_table,
                  std::size_t mt_d, nn::Rng& rng);

  AnalysisNodes encode(nn::Graph& g, const EncodedAnalysis& a) const;
  AnalysisRepr repr(const EncodedAnalysis& a) const;
  std::size_t length() const { return 2 * mt_d_; }

  // Excludes the shared character table.
  static std::size_t parameter_count(const VocabSizes& sizes, std::size_t ch_d, std::size_t mt_d);

 private:
  std::size_t mt_d_ = 0;
  nn::Parameter* char_table_ = nullptr;
  nn::BiLstm root_lstm_;
  nn::Parameter* tag_table_ = nullptr;
  nn::BiLstm tag_lstm_;
};

}  // namespace jointtag
