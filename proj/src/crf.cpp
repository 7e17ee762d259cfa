#include "jointtag/crf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "jointtag/errors.hpp"

namespace jointtag::crf {
namespace {

double log_sum_exp(const Vec& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

void check_labels(const Trellis& t, std::span<const int> labels) {
  if (labels.size() != t.length()) {
    throw ShapeError("label sequence length " + std::to_string(labels.size()) +
                     " does not match trellis length " + std::to_string(t.length()));
  }
  for (const int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= t.num_labels()) {
      throw DataError("label id " + std::to_string(y) + " outside [0, K)");
    }
  }
}

// Log-space forward (alpha) and backward (beta) tables, both n x K.
// alpha_i(k) includes s_i(k); beta_i(k) excludes it.
void forward_backward(const Trellis& t, std::vector<Vec>& alpha, std::vector<Vec>& beta) {
  const std::size_t n = t.length(), K = t.num_labels();
  alpha.assign(n, Vec(K));
  beta.assign(n, Vec(K));
  Vec terms(K);
  for (std::size_t k = 0; k < K; ++k) alpha[0][k] = t.transition(t.start(), k) + t.scores[0][k];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < K; ++j) terms[j] = alpha[i - 1][j] + t.transition(j, k);
      alpha[i][k] = log_sum_exp(terms) + t.scores[i][k];
    }
  }
  for (std::size_t k = 0; k < K; ++k) beta[n - 1][k] = t.transition(k, t.stop());
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        terms[k] = t.transition(j, k) + t.scores[i + 1][k] + beta[i + 1][k];
      }
      beta[i][j] = log_sum_exp(terms);
    }
  }
}

}  // namespace

Trellis make_trellis(std::vector<Vec> scores, const nn::Tensor& label_transitions,
                     const Vec& start_scores, const Vec& stop_scores) {
  const std::size_t K = start_scores.size();
  if (label_transitions.rows != K || label_transitions.cols != K || stop_scores.size() != K) {
    throw ShapeError("CRF transition shapes disagree with K=" + std::to_string(K));
  }
  Trellis t;
  t.scores = std::move(scores);
  t.transitions = nn::Tensor(K + 2, K + 2, kForbidden);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t k = 0; k < K; ++k) t.transitions.at(j, k) = label_transitions.at(j, k);
    t.transitions.at(K, j) = start_scores[j];
    t.transitions.at(j, K + 1) = stop_scores[j];
  }
  check_trellis(t);
  return t;
}

void check_trellis(const Trellis& t) {
  if (t.transitions.rows < 3 || t.transitions.rows != t.transitions.cols) {
    throw ShapeError("transition matrix must be (K+2)x(K+2) with K >= 1");
  }
  if (t.scores.empty()) throw ShapeError("trellis needs at least one position");
  const std::size_t K = t.num_labels();
  for (const auto& s : t.scores) {
    if (s.size() != K) throw ShapeError("score vector size differs from K=" + std::to_string(K));
  }
  for (std::size_t j = 0; j < K + 2; ++j) {
    if (t.transitions.at(j, t.start()) != kForbidden || t.transitions.at(t.stop(), j) != kForbidden) {
      throw ShapeError("transitions into START and out of STOP must be forbidden");
    }
  }
}

double path_score(const Trellis& t, std::span<const int> labels) {
  check_labels(t, labels);
  const auto y = [&](std::size_t i) { return static_cast<std::size_t>(labels[i]); };
  double score = t.transition(t.start(), y(0)) + t.scores[0][y(0)];
  for (std::size_t i = 1; i < t.length(); ++i) {
    score = (score + t.transition(y(i - 1), y(i))) + t.scores[i][y(i)];
  }
  return score + t.transition(y(t.length() - 1), t.stop());
}

double log_partition(const Trellis& t) {
  const std::size_t n = t.length(), K = t.num_labels();
  Vec alpha(K), next(K), terms(K);
  for (std::size_t k = 0; k < K; ++k) alpha[k] = t.transition(t.start(), k) + t.scores[0][k];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < K; ++j) terms[j] = alpha[j] + t.transition(j, k);
      next[k] = log_sum_exp(terms) + t.scores[i][k];
    }
    std::swap(alpha, next);
  }
  for (std::size_t k = 0; k < K; ++k) terms[k] = alpha[k] + t.transition(k, t.stop());
  return log_sum_exp(terms);
}

double crf_loss(const Trellis& t, std::span<const int> gold) {
  const double gold_score = path_score(t, gold);
  // Clamp the tiny negative values rounding can produce for K = 1.
  return std::max(0.0, log_partition(t) - gold_score);
}

Decoded viterbi(const Trellis& t) {
  const std::size_t n = t.length(), K = t.num_labels();
  std::vector<Vec> delta(n, Vec(K));
  std::vector<std::vector<int>> back(n, std::vector<int>(K, 0));
  for (std::size_t k = 0; k < K; ++k) delta[0][k] = t.transition(t.start(), k) + t.scores[0][k];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      double best = delta[i - 1][0] + t.transition(0, k);
      int arg = 0;
      for (std::size_t j = 1; j < K; ++j) {
        const double cand = delta[i - 1][j] + t.transition(j, k);
        if (cand > best) {
          best = cand;
          arg = static_cast<int>(j);
        }
      }
      delta[i][k] = best + t.scores[i][k];
      back[i][k] = arg;
    }
  }
  Decoded out;
  out.score = delta[n - 1][0] + t.transition(0, t.stop());
  int last = 0;
  for (std::size_t k = 1; k < K; ++k) {
    const double cand = delta[n - 1][k] + t.transition(k, t.stop());
    if (cand > out.score) {
      out.score = cand;
      last = static_cast<int>(k);
    }
  }
  out.labels.assign(n, 0);
  out.labels[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) {
    out.labels[i - 1] = back[i][static_cast<std::size_t>(out.labels[i])];
  }
  return out;
}

Marginals marginals(const Trellis& t) {
  const std::size_t n = t.length(), K = t.num_labels();
  std::vector<Vec> alpha, beta;
  forward_backward(t, alpha, beta);
  Vec terms(K);
  for (std::size_t k = 0; k < K; ++k) terms[k] = alpha[n - 1][k] + beta[n - 1][k];
  const double log_z = log_sum_exp(terms);
  Marginals m;
  m.unary.assign(n, Vec(K));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) m.unary[i][k] = std::exp(alpha[i][k] + beta[i][k] - log_z);
  }
  m.pairwise.assign(n > 0 ? n - 1 : 0, std::vector<Vec>(K, Vec(K)));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        m.pairwise[i][j][k] = std::exp(alpha[i][j] + t.transition(j, k) + t.scores[i + 1][k] +
                                       beta[i + 1][k] - log_z);
      }
    }
  }
  return m;
}

CrfParams make_crf(nn::ParameterStore& store, const std::string& prefix, std::size_t num_labels,
                   nn::Rng& rng) {
  CrfParams c;
  c.transitions = &store.add(prefix + ".transitions", num_labels, num_labels, nn::Init::kGlorot, rng);
  c.start = &store.add(prefix + ".start", num_labels, 1, nn::Init::kGlorot, rng);
  c.stop = &store.add(prefix + ".stop", num_labels, 1, nn::Init::kGlorot, rng);
  return c;
}

Trellis trellis_from(const nn::Graph& g, std::span<const nn::Var> scores, const CrfParams& params) {
  std::vector<Vec> s;
  s.reserve(scores.size());
  for (const nn::Var v : scores) s.push_back(g.value(v));
  return make_trellis(std::move(s), params.transitions->value, params.start->value.data,
                      params.stop->value.data);
}

nn::Var crf_loss(nn::Graph& g, std::span<const nn::Var> scores, const CrfParams& params,
                 std::span<const int> gold) {
  Trellis t = trellis_from(g, scores, params);
  const double loss = crf_loss(t, gold);
  std::vector<nn::Var> inputs(scores.begin(), scores.end());
  std::vector<int> labels(gold.begin(), gold.end());
  return g.custom({loss}, [params, inputs = std::move(inputs), labels = std::move(labels),
                           t = std::move(t)](nn::Graph& gr, const Vec& out_grad) {
    const double w = out_grad[0];
    const std::size_t n = t.length(), K = t.num_labels();
    const Marginals m = marginals(t);
    for (std::size_t i = 0; i < n; ++i) {
      Vec& ds = gr.grad(inputs[i]);
      for (std::size_t k = 0; k < K; ++k) ds[k] += w * m.unary[i][k];
      ds[static_cast<std::size_t>(labels[i])] -= w;
    }
    nn::Tensor& dA = params.transitions->grad;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t k = 0; k < K; ++k) dA.at(j, k) += w * m.pairwise[i][j][k];
      }
      dA.at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(labels[i + 1])) -= w;
    }
    for (std::size_t k = 0; k < K; ++k) {
      params.start->grad.data[k] += w * m.unary[0][k];
      params.stop->grad.data[k] += w * m.unary[n - 1][k];
    }
    params.start->grad.data[static_cast<std::size_t>(labels[0])] -= w;
    params.stop->grad.data[static_cast<std::size_t>(labels[n - 1])] -= w;
  });
}

}  // namespace jointtag::crf
