#include "jointtag/analysis_codec.hpp"

#include "jointtag/errors.hpp"
#include "jointtag/utf8.hpp"

namespace jointtag {

std::string MorphAnalysis::join() const {
  std::string out = root;
  for (const auto& tag : tags) {
    out += '+';
    out += tag;
  }
  return out;
}

MorphAnalysis parse_analysis(std::string_view raw) {
  if (raw.empty() || raw.front() == '+') throw AnalysisError(std::string(raw));
  MorphAnalysis a;
  a.raw = std::string(raw);
  std::size_t pos = raw.find('+');
  a.root = std::string(raw.substr(0, pos));
  while (pos != std::string_view::npos) {
    const std::size_t next = raw.find('+', pos + 1);
    a.tags.emplace_back(raw.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1));
    pos = next;
  }
  return a;
}

std::vector<std::string> analysis_char_seq(std::string_view raw) {
  if (raw.empty()) throw AnalysisError(std::string(raw));
  return utf8::split_code_points(raw);
}

}  // namespace jointtag
