#include "jointtag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "jointtag/errors.hpp"

namespace jointtag::metrics {

std::vector<Entity> extract_entities(const LabelSeq& labels, bool strict) {
  std::vector<Entity> out;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& label = labels[i];
    if (label == "O") {
      open = false;
      continue;
    }
    if (label.size() < 3 || label[1] != '-' || (label[0] != 'B' && label[0] != 'I')) {
      throw DataError("unknown NER label '" + label + "'");
    }
    const std::string type = label.substr(2);
    if (label[0] == 'I' && open && out.back().type == type) {
      out.back().end = i;
      continue;
    }
    if (label[0] == 'I' && strict) {
      throw DataError("'" + label + "' at position " + std::to_string(i) + " has no " + type + " predecessor");
    }
    out.push_back({type, i, i});
    open = true;
  }
  std::sort(out.begin(), out.end());
  return out;
}

PRF ner_f1(const std::vector<LabelSeq>& gold, const std::vector<LabelSeq>& predicted) {
  if (gold.size() != predicted.size()) throw DataError("ner_f1: sentence counts differ");
  PRF r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) {
      throw DataError("ner_f1: sentence " + std::to_string(s) + " lengths differ");
    }
    const auto g = extract_entities(gold[s]);
    const auto p = extract_entities(predicted[s]);
    std::vector<Entity> common;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
    r.gold_entities += g.size();
    r.predicted_entities += p.size();
    r.correct += common.size();
  }
  r.precision = r.predicted_entities ? static_cast<double>(r.correct) / static_cast<double>(r.predicted_entities) : 0.0;
  r.recall = r.gold_entities ? static_cast<double>(r.correct) / static_cast<double>(r.gold_entities) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

double token_accuracy(const std::vector<LabelSeq>& gold, const std::vector<LabelSeq>& predicted) {
  if (gold.size() != predicted.size()) throw DataError("token_accuracy: sentence counts differ");
  std::size_t total = 0, correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) throw DataError("token_accuracy: lengths differ");
    for (std::size_t i = 0; i < gold[s].size(); ++i) correct += gold[s][i] == predicted[s][i];
    total += gold[s].size();
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

MdAccuracy md_accuracy(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                       const std::vector<std::size_t>& num_candidates) {
  if (gold.size() != predicted.size() || gold.size() != num_candidates.size()) {
    throw DataError("md_accuracy: token counts are not aligned");
  }
  MdAccuracy r;
  std::size_t correct = 0, amb_correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool ok = gold[i] == predicted[i];
    correct += ok;
    if (num_candidates[i] >= 2) {
      ++r.ambiguous_tokens;
      amb_correct += ok;
    }
  }
  r.tokens = gold.size();
  r.overall = r.tokens ? static_cast<double>(correct) / static_cast<double>(r.tokens) : 0.0;
  if (r.ambiguous_tokens) r.ambiguous = static_cast<double>(amb_correct) / static_cast<double>(r.ambiguous_tokens);
  return r;
}

RunStats RunStats::of(std::vector<double> values) {
  RunStats s;
  s.values = std::move(values);
  const double n = static_cast<double>(s.values.size());
  if (s.values.empty()) return s;
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  if (s.values.size() >= 2) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("welch_t_test: each sample needs at least 2 values");
  const RunStats sa = RunStats::of(a), sb = RunStats::of(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = *sa.stddev * *sa.stddev / na;
  const double vb = *sb.stddev * *sb.stddev / nb;
  if (va == 0.0 && vb == 0.0) throw DataError("welch_t_test: both samples have zero variance");
  WelchResult r;
  r.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  // Two-sided Student-t tail: P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2).
  r.p = boost::math::ibeta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
  return r;
}

}  // namespace jointtag::metrics
