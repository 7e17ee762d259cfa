#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace jointtag {

// A '+'-joined morphological analysis split into its root and tag sequence,
// e.g. "Moda+Noun+Prop+A3sg+Pnon+Loc" -> root "Moda", tags (Noun, Prop, ...).
// The first '+' always terminates the root, so roots cannot contain '+'.
struct MorphAnalysis {
  std::string raw;
  std::string root;
  std::vector<std::string> tags;

  // Re-joins root and tags with '+'; equals raw for parsed analyses.
  std::string join() const;

  friend bool operator==(const MorphAnalysis&, const MorphAnalysis&) = default;
};

// Throws AnalysisError for an empty string or one starting with '+'.
MorphAnalysis parse_analysis(std::string_view raw);

// The whole analysis string as a sequence of user-perceived characters
// (code points), separators included. Throws AnalysisError on empty input.
std::vector<std::string> analysis_char_seq(std::string_view raw);

}  // namespace jointtag
