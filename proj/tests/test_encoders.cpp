#include <gtest/gtest.h>

#include <cmath>

#include "jointtag/encoders.hpp"
#include "jointtag/errors.hpp"
#include "jointtag/gradcheck_suite.hpp"
#include "test_support.hpp"

using namespace jointtag;
using namespace jointtag::nn;
using jointtag::testing::corpus_from;

namespace {

void zero_all(ParameterStore& store) {
  for (auto& [_, p] : store.all()) {
    for (auto& x : p.value.data) x = 0.0;
  }
}

BiLstm bilstm_named(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t h) {
  const auto cell = [&](const std::string& dir) {
    return LstmCell{&store.get(prefix + dir + ".W"), &store.get(prefix + dir + ".U"), &store.get(prefix + dir + ".b"),
                    in, h};
  };
  return {cell(".fwd"), cell(".bwd")};
}

Vec row(const Parameter& table, std::size_t r) {
  return Vec(table.value.data.begin() + static_cast<std::ptrdiff_t>(r * table.value.cols),
             table.value.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * table.value.cols));
}

struct Fixture {
  Corpus corpus = gradcheck_fixture();
  Vocabulary vocab = build_vocabularies(corpus);
  VocabSizes sizes = VocabSizes::of(vocab);
  ParameterStore store;
  Rng rng{3};
};

}  // namespace

TEST(EncodeUnit, ZeroWeightsReluOff) {
  ParameterStore store;
  Rng rng(1);
  const BiLstm net = make_bilstm(store, "u", 3, 4, rng);
  zero_all(store);
  EXPECT_EQ(encode_unit(net, {{1, 2, 3}, {4, 5, 6}}, false), Vec(8, 0.0));
}

TEST(EncodeUnit, LengthOneUsesSingleSteps) {
  ParameterStore store;
  Rng rng(2);
  const BiLstm net = make_bilstm(store, "u", 3, 2, rng);
  const Vec x{0.2, -0.4, 0.9};
  const LstmState zero{Vec(2, 0.0), Vec(2, 0.0)};
  Vec expected = lstm_step(net.fwd, x, zero).h;
  const Vec b = lstm_step(net.bwd, x, zero).h;
  expected.insert(expected.end(), b.begin(), b.end());
  EXPECT_EQ(encode_unit(net, {x}, false), expected);
}

TEST(EncodeUnit, ForwardLastBackwardFirst) {
  ParameterStore store;
  Rng rng(4);
  const BiLstm net = make_bilstm(store, "u", 2, 3, rng);
  const std::vector<Vec> xs{{0.1, 0.5}, {-0.3, 0.2}, {0.8, -0.6}};
  const auto full = bilstm(net, xs);
  const Vec out = encode_unit(net, xs, false);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(out[k], full.back()[k]);
    EXPECT_EQ(out[3 + k], full.front()[3 + k]);
  }
}

TEST(EncodeUnit, ReluOutputsNonNegative) {
  ParameterStore store;
  Rng rng(5);
  const BiLstm net = make_bilstm(store, "u", 2, 6, rng);
  const Vec out = encode_unit(net, {{1.5, -2.0}, {0.3, 0.9}}, true);
  bool some_zero = false;
  for (double v : out) {
    EXPECT_GE(v, 0.0);
    some_zero = some_zero || v == 0.0;
  }
  const Vec raw = encode_unit(net, {{1.5, -2.0}, {0.3, 0.9}}, false);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(out[i], std::max(raw[i], 0.0));
  EXPECT_THROW(encode_unit(net, {}, true), ShapeError);
}

TEST(WordEncoder, UnseenWordUsesUnkRow) {
  Fixture f;
  WordReprConfig cfg;
  cfg.w_d = cfg.ch_d = cfg.mt_d = 4;
  const WordEncoder enc(f.store, f.sizes, cfg, f.rng);
  const Corpus other = corpus_from("zzz\tO\tzzz+Noun\tzzz+Noun\n");
  const EncodedSentence s = encode_sentence(other.front(), f.vocab);
  EXPECT_EQ(s.tokens[0].word, 0);
  Graph g;
  Rng rng(0);
  const Vec x = g.value(enc.encode(g, s.tokens[0], Mode::kEval, rng));
  const Vec unk = row(f.store.get("word.embed"), 0);
  EXPECT_EQ(Vec(x.begin(), x.begin() + 4), unk);
}

TEST(WordEncoder, LengthsPerConfig) {
  Fixture f;
  WordReprConfig cfg;
  cfg.w_d = 3;
  cfg.ch_d = 4;
  cfg.mt_d = 5;
  cfg.use_ext_morph = true;
  EXPECT_EQ(cfg.length(), 3u + 8u + 10u);
  const WordEncoder enc(f.store, f.sizes, cfg, f.rng);
  Rng rng(0);
  for (const auto& sentence : f.corpus) {
    for (const auto& tok : encode_sentence(sentence, f.vocab).tokens) {
      Graph g;
      EXPECT_EQ(g.value(enc.encode(g, tok, Mode::kEval, rng)).size(), 21u);
    }
  }
  EXPECT_EQ(f.store.scalar_count(), WordEncoder::parameter_count(f.sizes, cfg));
}

TEST(WordEncoder, EvalIsDeterministicTrainDrops) {
  Fixture f;
  WordReprConfig cfg;
  cfg.dropout_rate = 0.5;
  const WordEncoder enc(f.store, f.sizes, cfg, f.rng);
  const EncodedSentence s = encode_sentence(f.corpus.front(), f.vocab);
  Rng rng(1);
  Graph g1, g2, g3;
  const Vec a = g1.value(enc.encode(g1, s.tokens[1], Mode::kEval, rng));
  const Vec b = g2.value(enc.encode(g2, s.tokens[1], Mode::kEval, rng));
  EXPECT_EQ(a, b);
  const Vec c = g3.value(enc.encode(g3, s.tokens[1], Mode::kTrain, rng));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(c[i] == 0.0 || std::abs(c[i] - 2.0 * a[i]) < 1e-15);
}

TEST(AnalysisEncoder, ZeroWeightsGiveZero) {
  Fixture f;
  Parameter& chars = f.store.add("char.embed", f.sizes.chars, 4, Init::kGlorot, f.rng);
  const AnalysisEncoder enc(f.store, f.sizes, chars, 4, f.rng);
  zero_all(f.store);
  const AnalysisRepr r = enc.repr(encode_analysis(parse_analysis("Moda+Noun+Prop+A3sg+Pnon+Loc"), f.vocab));
  EXPECT_EQ(r.r, Vec(8, 0.0));
  EXPECT_EQ(r.ms, Vec(8, 0.0));
  EXPECT_EQ(r.ma, Vec(8, 0.0));
}

TEST(AnalysisEncoder, EmptyTagsGiveTanhOfRoot) {
  Fixture f;
  Parameter& chars = f.store.add("char.embed", f.sizes.chars, 4, Init::kGlorot, f.rng);
  const AnalysisEncoder enc(f.store, f.sizes, chars, 4, f.rng);
  const AnalysisRepr r = enc.repr(encode_analysis(parse_analysis("evi"), f.vocab));
  EXPECT_EQ(r.ms, Vec(8, 0.0));
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(r.ma[i], std::tanh(r.r[i]));
}

TEST(AnalysisEncoder, ComponentsByHand) {
  Fixture f;
  Parameter& chars = f.store.add("char.embed", f.sizes.chars, 3, Init::kGlorot, f.rng);
  const AnalysisEncoder enc(f.store, f.sizes, chars, 4, f.rng);
  const MorphAnalysis a = parse_analysis("Moda+Noun+Prop+A3sg+Pnon+Loc");
  const EncodedAnalysis e = encode_analysis(a, f.vocab);
  ASSERT_EQ(e.tags.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(e.tags[i], f.vocab.morphtags.id(a.tags[i]));
  ASSERT_EQ(e.root_chars.size(), 4u);

  std::vector<Vec> tag_rows, root_rows;
  for (const int id : e.tags) tag_rows.push_back(row(f.store.get("md.tag.embed"), static_cast<std::size_t>(id)));
  for (const int id : e.root_chars) root_rows.push_back(row(chars, static_cast<std::size_t>(id)));
  const Vec ms = encode_unit(bilstm_named(f.store, "md.tag.lstm", 4, 4), tag_rows, true);
  const Vec r = encode_unit(bilstm_named(f.store, "md.root.lstm", 3, 4), root_rows, true);
  const AnalysisRepr got = enc.repr(e);
  EXPECT_EQ(got.ms, ms);
  EXPECT_EQ(got.r, r);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(got.ma[i], std::tanh(r[i] + ms[i]));
    EXPECT_LT(std::abs(got.ma[i]), 1.0);
  }
  EXPECT_EQ(enc.repr(encode_analysis(parse_analysis(a.raw), f.vocab)).ma, got.ma);
  EXPECT_EQ(f.store.scalar_count() - chars.value.size(), AnalysisEncoder::parameter_count(f.sizes, 3, 4));
}
