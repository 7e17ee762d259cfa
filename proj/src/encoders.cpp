#include "jointtag/encoders.hpp"

#include "jointtag/errors.hpp"
#include "jointtag/utf8.hpp"

namespace jointtag {

EncodedAnalysis encode_analysis(const MorphAnalysis& a, const Vocabulary& vocab) {
  EncodedAnalysis e;
  for (const auto& ch : utf8::split_code_points(a.root)) e.root_chars.push_back(vocab.chars.id(ch));
  for (const auto& tag : a.tags) e.tags.push_back(vocab.morphtags.id(tag));
  for (const auto& ch : utf8::split_code_points(a.raw)) e.chars.push_back(vocab.analysis_chars.id(ch));
  return e;
}

EncodedSentence encode_sentence(const Sentence& s, const Vocabulary& vocab) {
  EncodedSentence out;
  out.tokens.reserve(s.tokens.size());
  for (const Token& tok : s.tokens) {
    EncodedToken e;
    e.word = vocab.words.id(tok.surface);
    for (const auto& ch : utf8::split_code_points(tok.surface)) e.chars.push_back(vocab.chars.id(ch));
    e.gold = encode_analysis(tok.gold_analysis, vocab);
    for (const auto& cand : tok.candidates) e.candidates.push_back(encode_analysis(cand, vocab));
    e.gold_index = tok.gold_index;
    e.ner_label = vocab.ner_labels.contains(tok.ner_label) ? vocab.ner_labels.id(tok.ner_label) : -1;
    out.tokens.push_back(std::move(e));
  }
  return out;
}

nn::Var encode_unit(nn::Graph& g, const nn::BiLstm& net, std::span<const nn::Var> elements, bool apply_relu) {
  if (elements.empty()) throw ShapeError("encode_unit: empty element sequence");
  const nn::BiLstmStates states = nn::bilstm_states(g, net, elements);
  const nn::Var joined = g.concat({states.fwd.back(), states.bwd.front()});
  return apply_relu ? g.relu(joined) : joined;
}

nn::Vec encode_unit(const nn::BiLstm& net, const std::vector<nn::Vec>& elements, bool apply_relu) {
  nn::Graph g;
  std::vector<nn::Var> in;
  for (const auto& e : elements) in.push_back(g.constant(e));
  return g.value(encode_unit(g, net, in, apply_relu));
}

namespace {

std::vector<nn::Var> lookups(nn::Graph& g, nn::Parameter& table, const std::vector<int>& ids) {
  std::vector<nn::Var> out;
  out.reserve(ids.size());
  for (const int id : ids) out.push_back(g.lookup(table, static_cast<std::size_t>(id)));
  return out;
}

}  // namespace

WordEncoder::WordEncoder(nn::ParameterStore& store, const VocabSizes& sizes, const WordReprConfig& config,
                         nn::Rng& rng)
    : config_(config) {
  word_table_ = &store.add("word.embed", sizes.words, config.w_d, nn::Init::kGlorot, rng);
  // The character table also feeds root encoding in the MD head, so it is
  // allocated even when the surface channel is off.
  char_table_ = &store.add("char.embed", sizes.chars, config.ch_d, nn::Init::kGlorot, rng);
  if (config.use_char) char_lstm_ = nn::make_bilstm(store, "char.lstm", config.ch_d, config.ch_d, rng);
  if (config.use_ext_morph) {
    ext_table_ = &store.add("ext.embed", sizes.analysis_chars, config.mt_d, nn::Init::kGlorot, rng);
    ext_lstm_ = nn::make_bilstm(store, "ext.lstm", config.mt_d, config.mt_d, rng);
  }
}

std::size_t WordEncoder::parameter_count(const VocabSizes& sizes, const WordReprConfig& config) {
  std::size_t n = sizes.words * config.w_d + sizes.chars * config.ch_d;
  if (config.use_char) n += 2 * nn::lstm_parameter_count(config.ch_d, config.ch_d);
  if (config.use_ext_morph) {
    n += sizes.analysis_chars * config.mt_d + 2 * nn::lstm_parameter_count(config.mt_d, config.mt_d);
  }
  return n;
}

nn::Var WordEncoder::encode(nn::Graph& g, const EncodedToken& token, nn::Mode mode, nn::Rng& rng) const {
  std::vector<nn::Var> parts{g.lookup(*word_table_, static_cast<std::size_t>(token.word))};
  if (config_.use_char) {
    parts.push_back(encode_unit(g, char_lstm_, lookups(g, *char_table_, token.chars), false));
  }
  if (config_.use_ext_morph) {
    parts.push_back(encode_unit(g, ext_lstm_, lookups(g, *ext_table_, token.gold.chars), false));
  }
  const nn::Var x = parts.size() == 1 ? parts.front() : g.concat(parts);
  return g.dropout(x, config_.dropout_rate, mode, rng);
}

AnalysisEncoder::AnalysisEncoder(nn::ParameterStore& store, const VocabSizes& sizes, nn::Parameter& char_table,
                                 std::size_t mt_d, nn::Rng& rng)
    : mt_d_(mt_d), char_table_(&char_table) {
  root_lstm_ = nn::make_bilstm(store, "md.root.lstm", char_table.value.cols, mt_d, rng);
  tag_table_ = &store.add("md.tag.embed", sizes.morphtags, mt_d, nn::Init::kGlorot, rng);
  tag_lstm_ = nn::make_bilstm(store, "md.tag.lstm", mt_d, mt_d, rng);
}

std::size_t AnalysisEncoder::parameter_count(const VocabSizes& sizes, std::size_t ch_d, std::size_t mt_d) {
  return 2 * nn::lstm_parameter_count(ch_d, mt_d) + sizes.morphtags * mt_d +
         2 * nn::lstm_parameter_count(mt_d, mt_d);
}

AnalysisNodes AnalysisEncoder::encode(nn::Graph& g, const EncodedAnalysis& a) const {
  AnalysisNodes out;
  out.root = encode_unit(g, root_lstm_, lookups(g, *char_table_, a.root_chars), true);
  if (a.tags.empty()) {
    out.tags = g.constant(nn::Vec(2 * mt_d_, 0.0));
  } else {
    out.tags = encode_unit(g, tag_lstm_, lookups(g, *tag_table_, a.tags), true);
  }
  out.repr = g.tanh(g.add(out.root, out.tags));
  return out;
}

AnalysisRepr AnalysisEncoder::repr(const EncodedAnalysis& a) const {
  nn::Graph g;
  const AnalysisNodes n = encode(g, a);
  return {g.value(n.root), g.value(n.tags), g.value(n.repr)};
}

}  // namespace jointtag
