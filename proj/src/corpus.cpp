#include "jointtag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "jointtag/errors.hpp"

namespace jointtag {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

Token parse_token_line(const std::string& line, const std::string& source, std::size_t lineno) {
  const auto fields = split(line, '\t');
  if (fields.size() != 4 && fields.size() != 6) {
    throw LoadError(source, lineno,
                    "expected 4 or 6 tab-separated fields, found " + std::to_string(fields.size()));
  }
  Token tok;
  tok.surface = fields[0];
  tok.ner_label = fields[1];
  if (tok.surface.empty()) throw LoadError(source, lineno, "empty surface form");
  if (tok.ner_label.empty()) throw LoadError(source, lineno, "empty NER label");
  try {
    tok.gold_analysis = parse_analysis(fields[2]);
    if (fields[3].empty()) throw LoadError(source, lineno, "empty candidate list");
    std::set<std::string> seen;
    for (const auto& cand : split(fields[3], ' ')) {
      if (cand.empty()) throw LoadError(source, lineno, "empty candidate (stray space)");
      if (!seen.insert(cand).second) {
        throw LoadError(source, lineno, "duplicate candidate '" + cand + "'");
      }
      tok.candidates.push_back(parse_analysis(cand));
    }
  } catch (const AnalysisError& e) {
    throw LoadError(source, lineno, e.what());
  }
  for (std::size_t j = 0; j < tok.candidates.size(); ++j) {
    if (tok.candidates[j].raw == tok.gold_analysis.raw) {
      tok.gold_index = j;
      break;
    }
  }
  if (fields.size() == 6) {
    tok.predicted_ner = fields[4];
    tok.predicted_analysis = fields[5];
  }
  return tok;
}

}  // namespace

std::string iob2_violation(const std::vector<std::string>& labels,
                           const std::vector<std::string>& entity_types) {
  const auto known = [&](const std::string& type) {
    return std::find(entity_types.begin(), entity_types.end(), type) != entity_types.end();
  };
  std::string prev_type;  // empty when the previous label is O or the sentence start
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& label = labels[i];
    if (label == "O") {
      prev_type.clear();
      continue;
    }
    if (label.size() < 3 || label[1] != '-' || (label[0] != 'B' && label[0] != 'I')) {
      return "unknown label '" + label + "' at position " + std::to_string(i);
    }
    const std::string type = label.substr(2);
    if (!known(type)) return "unknown entity type '" + type + "' at position " + std::to_string(i);
    if (label[0] == 'I' && prev_type != type) {
      return "'" + label + "' at position " + std::to_string(i) + " does not continue a " + type +
             " entity";
    }
    prev_type = type;
  }
  return {};
}

Corpus read_corpus(std::istream& in, const std::string& source_name, const LoadOptions& options) {
  Corpus corpus;
  Sentence current;
  std::vector<std::size_t> current_lines;
  std::string line;
  std::size_t lineno = 0;

  const auto flush = [&]() {
    if (current.tokens.empty()) return;
    std::vector<std::string> labels;
    for (const auto& t : current.tokens) labels.push_back(t.ner_label);
    if (const auto err = iob2_violation(labels, options.entity_types); !err.empty()) {
      // Report the line of the first token of the offending sentence.
      throw LoadError(source_name, current_lines.front(), "invalid IOB2 sequence: " + err);
    }
    corpus.push_back(std::move(current));
    current = Sentence{};
    current_lines.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      flush();
      continue;
    }
    current.tokens.push_back(parse_token_line(line, source_name, lineno));
    current_lines.push_back(lineno);
  }
  flush();
  return corpus;
}

Corpus load_corpus(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "cannot open corpus file");
  return read_corpus(in, path, options);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& tok : corpus[s].tokens) {
      out << tok.surface << '\t' << tok.ner_label << '\t' << tok.gold_analysis.raw << '\t';
      for (std::size_t j = 0; j < tok.candidates.size(); ++j) {
        if (j > 0) out << ' ';
        out << tok.candidates[j].raw;
      }
      if (tok.predicted_ner || tok.predicted_analysis) {
        out << '\t' << tok.predicted_ner.value_or("_") << '\t' << tok.predicted_analysis.value_or("_");
      }
      out << '\n';
    }
  }
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_corpus(corpus, out);
  out.flush();
  if (!out) throw Error("write failed for '" + path + "'");
}

MismatchReport validate_gold_in_candidates(const Corpus& corpus) {
  MismatchReport report;
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    bool affected = false;
    for (std::size_t t = 0; t < corpus[s].tokens.size(); ++t) {
      const Token& tok = corpus[s].tokens[t];
      ++report.tokens_checked;
      if (tok.gold_index) continue;
      affected = true;
      Mismatch m{s, t, tok.surface, tok.gold_analysis.raw, {}};
      for (const auto& c : tok.candidates) m.candidates.push_back(c.raw);
      report.mismatches.push_back(std::move(m));
      ++counts[{tok.surface, tok.gold_analysis.raw}];
    }
    if (affected) ++report.sentences_affected;
  }
  for (const auto& [key, count] : counts) report.groups.push_back({key.first, key.second, count});
  std::stable_sort(report.groups.begin(), report.groups.end(),
                   [](const MismatchGroup& a, const MismatchGroup& b) { return a.count > b.count; });
  return report;
}

Corpus filter_mismatched(const Corpus& corpus) {
  Corpus out;
  for (const auto& sentence : corpus) {
    const bool clean = std::all_of(sentence.tokens.begin(), sentence.tokens.end(),
                                   [](const Token& t) { return t.gold_index.has_value(); });
    if (clean) out.push_back(sentence);
  }
  return out;
}

void write_mismatch_report(const MismatchReport& report, std::ostream& out) {
  out << "tokens_checked\t" << report.tokens_checked << '\n';
  out << "mismatches\t" << report.mismatches.size() << '\n';
  out << "sentences_affected\t" << report.sentences_affected << '\n';
  for (const auto& m : report.mismatches) {
    out << "mismatch\t" << m.sentence_index << '\t' << m.token_index << '\t' << m.surface << '\t'
        << m.gold << '\t';
    for (std::size_t j = 0; j < m.candidates.size(); ++j) out << (j ? " " : "") << m.candidates[j];
    out << '\n';
  }
  for (const auto& g : report.groups) {
    out << "group\t" << g.count << '\t' << g.surface << '\t' << g.gold << '\n';
  }
}

}  // namespace jointtag
