#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jointtag/diffnet.hpp"

namespace jointtag::md {

using nn::Vec;

struct MdScores {
  Vec scores;  // one per candidate analysis
  std::size_t gold_index = 0;
};

// scores_j = h . ma_j. Throws ShapeError if dimensions disagree or no candidate is given.
MdScores md_scores(const Vec& context, std::span<const Vec> candidate_reprs, std::size_t gold_index = 0);

// -log softmax(scores)[gold], stabilized with log-sum-exp.
double md_loss(const MdScores& s);

// Softmax probabilities over candidates.
Vec md_softmax(const Vec& scores);

// Argmax; ties go to the lowest index.
std::size_t md_select(const Vec& scores);
inline std::size_t md_select(const MdScores& s) { return md_select(s.scores); }

// Graph forms. md_score_node returns a vector node with one score per candidate.
nn::Var md_score_node(nn::Graph& g, nn::Var context, std::span<const nn::Var> candidate_reprs);
nn::Var md_loss_node(nn::Graph& g, nn::Var scores, std::size_t gold_index);

}  // namespace jointtag::md
