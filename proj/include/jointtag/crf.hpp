#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jointtag/diffnet.hpp"

namespace jointtag::crf {

using nn::Vec;

// Score of a forbidden transition (into START, out of STOP). Large enough to
// never win, small enough that exp() arithmetic stays finite.
inline constexpr double kForbidden = -1e4;

// n score vectors of size K plus a (K+2)x(K+2) transition matrix where index
// K is START and K+1 is STOP.
struct Trellis {
  std::vector<Vec> scores;
  nn::Tensor transitions;

  std::size_t length() const { return scores.size(); }
  std::size_t num_labels() const { return transitions.rows - 2; }
  std::size_t start() const { return num_labels(); }
  std::size_t stop() const { return num_labels() + 1; }
  double transition(std::size_t from, std::size_t to) const { return transitions.at(from, to); }
};

// Assembles a trellis from K x K label transitions and START/STOP vectors.
Trellis make_trellis(std::vector<Vec> scores, const nn::Tensor& label_transitions,
                     const Vec& start_scores, const Vec& stop_scores);

// Validates shapes and the forbidden-transition entries; throws ShapeError.
void check_trellis(const Trellis& t);

// A[START][y1] + s_1[y1] + A[y1][y2] + s_2[y2] + ... + A[yn][STOP], summed left to right.
double path_score(const Trellis& t, std::span<const int> labels);

double log_partition(const Trellis& t);

// log Z - path_score(gold) >= 0.
double crf_loss(const Trellis& t, std::span<const int> gold);

struct Decoded {
  std::vector<int> labels;
  double score = 0.0;
};

// Max-score path; ties go to the lowest label id.
Decoded viterbi(const Trellis& t);

struct Marginals {
  std::vector<Vec> unary;                    // n x K
  std::vector<std::vector<Vec>> pairwise;    // (n-1) x K x K
};
Marginals marginals(const Trellis& t);

// Trainable transition parameters of a CRF layer.
struct CrfParams {
  nn::Parameter* transitions = nullptr;  // K x K
  nn::Parameter* start = nullptr;        // K
  nn::Parameter* stop = nullptr;         // K
  std::size_t num_labels() const { return start->value.size(); }
};

CrfParams make_crf(nn::ParameterStore& store, const std::string& prefix, std::size_t num_labels,
                   nn::Rng& rng);

Trellis trellis_from(const nn::Graph& g, std::span<const nn::Var> scores, const CrfParams& params);

// Graph node computing crf_loss; gradients flow into the score nodes and the
// transition parameters via marginals minus gold indicators.
nn::Var crf_loss(nn::Graph& g, std::span<const nn::Var> scores, const CrfParams& params,
                 std::span<const int> gold);

}  // namespace jointtag::crf
