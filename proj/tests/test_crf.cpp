#include <gtest/gtest.h>

#include <cmath>

#include "jointtag/crf.hpp"
#include "jointtag/errors.hpp"
#include "test_support.hpp"

using namespace jointtag;
using namespace jointtag::crf;
using jointtag::testing::enumerate;
using jointtag::testing::for_each_sequence;
using jointtag::testing::random_trellis;

namespace {

Trellis flat_trellis(std::vector<Vec> scores) {
  const std::size_t k = scores.front().size();
  return make_trellis(std::move(scores), nn::Tensor(k, k), Vec(k, 0.0), Vec(k, 0.0));
}

}  // namespace

TEST(Trellis, ForbiddenEntriesAndShapes) {
  const Trellis t = flat_trellis({{1, 2, 3}});
  EXPECT_EQ(t.num_labels(), 3u);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(t.transition(j, t.start()), kForbidden);
    EXPECT_EQ(t.transition(t.stop(), j), kForbidden);
  }
  EXPECT_THROW(make_trellis({{1, 2}}, nn::Tensor(3, 3), Vec(3), Vec(3)), ShapeError);
  Trellis bad = t;
  bad.transitions.at(0, bad.start()) = 0.0;
  EXPECT_THROW(check_trellis(bad), ShapeError);
}

TEST(PathScore, SingleEmission) {
  const std::vector<int> y{1};
  EXPECT_EQ(path_score(flat_trellis({{2, 5}}), y), 5.0);
}

TEST(PathScore, HandSum) {
  nn::Tensor a(2, 2);
  a.at(0, 0) = 0.1;
  a.at(0, 1) = -0.4;
  a.at(1, 0) = 0.7;
  a.at(1, 1) = 0.2;
  const Trellis t = make_trellis({{1.0, 2.0}, {0.5, -1.0}}, a, {0.3, -0.2}, {0.05, 0.6});
  const std::vector<int> y{1, 0};
  // START->1, s_1[1], 1->0, s_2[0], 0->STOP
  EXPECT_DOUBLE_EQ(path_score(t, y), -0.2 + 2.0 + 0.7 + 0.5 + 0.05);
  const std::vector<int> wrong_length{1};
  EXPECT_THROW(path_score(t, wrong_length), ShapeError);
  const std::vector<int> out_of_range{1, 2};
  EXPECT_THROW(path_score(t, out_of_range), DataError);
}

TEST(PathScore, ShiftingEmissionsShiftsScore) {
  nn::Rng rng(4);
  const Trellis t = random_trellis(3, 3, rng);
  Trellis shifted = t;
  for (auto& s : shifted.scores) {
    for (auto& x : s) x += 1.25;
  }
  for_each_sequence(3, 3, [&](const std::vector<int>& y) {
    EXPECT_NEAR(path_score(shifted, y), path_score(t, y) + 3 * 1.25, 1e-12);
  });
}

TEST(LogPartition, TwoEqualPaths) { EXPECT_NEAR(log_partition(flat_trellis({{0, 0}})), std::log(2.0), 1e-15); }

TEST(LogPartition, MatchesEnumeration) {
  nn::Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Trellis t = random_trellis(3, 3, rng);
    EXPECT_NEAR(log_partition(t), enumerate(t).log_z, 1e-10);
  }
}

TEST(LogPartition, DominatesEveryPath) {
  nn::Rng rng(11);
  const Trellis t = random_trellis(4, 3, rng);
  const double z = log_partition(t);
  for_each_sequence(4, 3, [&](const std::vector<int>& y) { EXPECT_GE(z, path_score(t, y)); });
}

TEST(LogPartition, ProbabilitiesSumToOne) {
  nn::Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Trellis t = random_trellis(1 + trial % 4, 1 + (trial / 2) % 4, rng);
    const double z = log_partition(t);
    double total = 0.0;
    for_each_sequence(t.length(), t.num_labels(),
                      [&](const std::vector<int>& y) { total += std::exp(path_score(t, y) - z); });
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(CrfLoss, SingleLabelIsZero) {
  nn::Rng rng(2);
  const Trellis t = random_trellis(4, 1, rng);
  const std::vector<int> gold(4, 0);
  EXPECT_EQ(crf_loss(t, gold), 0.0);
}

TEST(CrfLoss, EqualsLogSumExpGap) {
  // Gold path made the unique maximum with a margin.
  nn::Rng rng(3);
  Trellis t = random_trellis(3, 3, rng, 0.5);
  const std::vector<int> gold{2, 0, 1};
  for (std::size_t i = 0; i < 3; ++i) t.scores[i][static_cast<std::size_t>(gold[i])] += 4.0;
  const auto e = enumerate(t);
  ASSERT_EQ(e.best, gold);
  double gap_sum = 0.0;
  for_each_sequence(3, 3, [&](const std::vector<int>& y) { gap_sum += std::exp(path_score(t, y) - e.best_score); });
  EXPECT_NEAR(crf_loss(t, gold), std::log(gap_sum), 1e-12);
}

TEST(CrfLoss, NonNegativeOnRandomTrellises) {
  nn::Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Trellis t = random_trellis(1 + trial % 4, 1 + trial % 3, rng, 3.0);
    std::vector<int> gold(t.length());
    for (auto& g : gold) g = static_cast<int>(rng() % t.num_labels());
    EXPECT_GE(crf_loss(t, gold), 0.0);
  }
}

TEST(Viterbi, SinglePosition) {
  const Decoded d = viterbi(flat_trellis({{3, 7}}));
  EXPECT_EQ(d.labels, std::vector<int>{1});
  EXPECT_EQ(d.score, 7.0);
}

TEST(Viterbi, AllEqualScoresPickLowestIds) {
  const Decoded d = viterbi(flat_trellis({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
  EXPECT_EQ(d.labels, (std::vector<int>{0, 0, 0}));
}

TEST(Viterbi, MatchesExhaustiveArgmax) {
  nn::Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Trellis t = random_trellis(1 + trial % 4, 1 + (trial / 4) % 4, rng);
    const auto e = enumerate(t);
    const Decoded d = viterbi(t);
    EXPECT_EQ(d.score, e.best_score);
    EXPECT_EQ(path_score(t, d.labels), d.score);
    if (e.best_count == 1) EXPECT_EQ(d.labels, e.best);
  }
}

TEST(Marginals, MatchEnumeration) {
  nn::Rng rng(15);
  const Trellis t = random_trellis(3, 3, rng);
  const double z = log_partition(t);
  std::vector<Vec> unary(3, Vec(3, 0.0));
  std::vector<std::vector<Vec>> pair(2, std::vector<Vec>(3, Vec(3, 0.0)));
  for_each_sequence(3, 3, [&](const std::vector<int>& y) {
    const double p = std::exp(path_score(t, y) - z);
    for (std::size_t i = 0; i < 3; ++i) unary[i][static_cast<std::size_t>(y[i])] += p;
    for (std::size_t i = 0; i < 2; ++i) pair[i][static_cast<std::size_t>(y[i])][static_cast<std::size_t>(y[i + 1])] += p;
  });
  const Marginals m = marginals(t);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(m.unary[i][k], unary[i][k], 1e-12);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(m.pairwise[i][j][k], pair[i][j][k], 1e-12);
    }
  }
}

TEST(CrfLossNode, ValueAndGradients) {
  nn::ParameterStore store;
  nn::Rng rng(16);
  const CrfParams crf = make_crf(store, "crf", 3, rng);
  nn::Parameter& s = store.add("scores", 4, 3, nn::Init::kGlorot, rng);
  const std::vector<int> gold{0, 2, 2, 1};
  const auto loss = [&](nn::Graph& g) {
    const nn::Var all = g.param(s);
    std::vector<nn::Var> rows;
    for (std::size_t i = 0; i < 4; ++i) rows.push_back(g.slice(all, 3 * i, 3));
    return crf_loss(g, rows, crf, gold);
  };
  {
    nn::Graph g;
    const nn::Var l = loss(g);
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < 4; ++i) rows.emplace_back(s.value.data.begin() + 3 * i, s.value.data.begin() + 3 * i + 3);
    const Trellis t = make_trellis(rows, crf.transitions->value, crf.start->value.data, crf.stop->value.data);
    EXPECT_EQ(g.scalar(l), crf_loss(t, gold));
  }
  EXPECT_LT(nn::grad_check(loss, store).max_relative_error, 1e-6);
  EXPECT_EQ(store.scalar_count(), 9u + 3u + 3u + 12u);
}
