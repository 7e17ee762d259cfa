#include "jointtag/md_head.hpp"

#include <cmath>
#include <string>

#include "jointtag/errors.hpp"

namespace jointtag::md {
namespace {

double log_sum_exp(const Vec& xs) {
  double m = xs.front();
  for (double x : xs) m = std::max(m, x);
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace

MdScores md_scores(const Vec& context, std::span<const Vec> candidate_reprs, std::size_t gold_index) {
  if (candidate_reprs.empty()) throw ShapeError("md_scores: no candidate analyses");
  if (gold_index >= candidate_reprs.size()) throw DataError("md_scores: gold index out of range");
  MdScores out;
  out.gold_index = gold_index;
  for (const Vec& ma : candidate_reprs) {
    if (ma.size() != context.size()) {
      throw ShapeError("md_scores: context size " + std::to_string(context.size()) +
                       " != analysis size " + std::to_string(ma.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) acc += context[i] * ma[i];
    out.scores.push_back(acc);
  }
  return out;
}

double md_loss(const MdScores& s) {
  if (s.scores.size() == 1) return 0.0;
  return log_sum_exp(s.scores) - s.scores.at(s.gold_index);
}

Vec md_softmax(const Vec& scores) {
  const double lse = log_sum_exp(scores);
  Vec p(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) p[j] = std::exp(scores[j] - lse);
  return p;
}

std::size_t md_select(const Vec& scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[best]) best = j;
  }
  return best;
}

nn::Var md_score_node(nn::Graph& g, nn::Var context, std::span<const nn::Var> candidate_reprs) {
  std::vector<Vec> reprs;
  for (const nn::Var v : candidate_reprs) reprs.push_back(g.value(v));
  Vec scores = md_scores(g.value(context), reprs).scores;
  std::vector<nn::Var> inputs(candidate_reprs.begin(), candidate_reprs.end());
  return g.custom(std::move(scores), [context, inputs = std::move(inputs)](nn::Graph& gr, const Vec& out) {
    const Vec& h = gr.value(context);
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      if (out[j] == 0.0) continue;
      const Vec& ma = gr.value(inputs[j]);
      Vec& dh = gr.grad(context);
      Vec& dma = gr.grad(inputs[j]);
      for (std::size_t i = 0; i < h.size(); ++i) {
        dh[i] += out[j] * ma[i];
        dma[i] += out[j] * h[i];
      }
    }
  });
}

nn::Var md_loss_node(nn::Graph& g, nn::Var scores, std::size_t gold_index) {
  const MdScores s{g.value(scores), gold_index};
  if (gold_index >= s.scores.size()) throw DataError("md_loss: gold index out of range");
  const double loss = md_loss(s);
  return g.custom({loss}, [scores, gold_index](nn::Graph& gr, const Vec& out) {
    const Vec p = md_softmax(gr.value(scores));
    Vec& ds = gr.grad(scores);
    for (std::size_t j = 0; j < p.size(); ++j) ds[j] += out[0] * p[j];
    ds[gold_index] -= out[0];
  });
}

}  // namespace jointtag::md
