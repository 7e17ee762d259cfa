#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "jointtag/corpus.hpp"
#include "jointtag/crf.hpp"

namespace jointtag::testing {

inline Corpus corpus_from(const std::string& text, const LoadOptions& opts = {}) {
  std::istringstream in(text);
  return read_corpus(in, "<test>", opts);
}

inline std::string corpus_text(const Corpus& c) {
  std::ostringstream out;
  write_corpus(c, out);
  return out.str();
}

// Calls fn on every label sequence of length n over K labels.
inline void for_each_sequence(std::size_t n, std::size_t k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> y(n, 0);
  while (true) {
    fn(y);
    std::size_t i = 0;
    while (i < n && ++y[i] == static_cast<int>(k)) y[i++] = 0;
    if (i == n) return;
  }
}

// Exhaustive log Z and maximum path score. best is the first maximizer in
// enumeration order; best_count says whether it is unique.
struct Enumerated {
  double log_z = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> best;
  std::size_t best_count = 0;
};

inline Enumerated enumerate(const crf::Trellis& t) {
  Enumerated e;
  std::vector<double> scores;
  for_each_sequence(t.length(), t.num_labels(), [&](const std::vector<int>& y) {
    const double s = crf::path_score(t, y);
    scores.push_back(s);
    if (s > e.best_score) {
      e.best_score = s;
      e.best = y;
      e.best_count = 1;
    } else if (s == e.best_score) {
      ++e.best_count;
    }
  });
  double m = e.best_score, acc = 0.0;
  for (double s : scores) acc += std::exp(s - m);
  e.log_z = m + std::log(acc);
  return e;
}

inline crf::Trellis random_trellis(std::size_t n, std::size_t k, nn::Rng& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<nn::Vec> scores(n, nn::Vec(k));
  for (auto& s : scores) {
    for (auto& x : s) x = u(rng);
  }
  nn::Tensor trans(k, k);
  for (auto& x : trans.data) x = u(rng);
  nn::Vec start(k), stop(k);
  for (auto& x : start) x = u(rng);
  for (auto& x : stop) x = u(rng);
  return crf::make_trellis(std::move(scores), trans, start, stop);
}

}  // namespace jointtag::testing
