#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "jointtag/corpus.hpp"

namespace jointtag {

inline constexpr const char* kUnkToken = "<UNK>";

// Bijective string <-> dense id map. Ids are assigned in insertion order.
// With an UNK entry (always id 0), lookups of unseen keys return it;
// without one they throw DataError.
class IdMap {
 public:
  explicit IdMap(bool with_unk);

  int add(const std::string& token);
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  bool has_unk() const { return has_unk_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const IdMap& a, const IdMap& b) {
    return a.has_unk_ == b.has_unk_ && a.tokens_ == b.tokens_;
  }

 private:
  bool has_unk_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tokens_;
};

struct Vocabulary {
  IdMap words{true};
  IdMap chars{true};
  IdMap morphtags{true};
  IdMap ner_labels{false};
  IdMap analysis_chars{true};

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

// Words and characters come from surfaces; tags and analysis characters from
// every candidate analysis (and the gold column); NER labels from tokens.
Vocabulary build_vocabularies(const Corpus& corpus);

// "#SECTION <name>" headers followed by "id\ttoken" lines.
void write_vocabulary(const Vocabulary& vocab, std::ostream& out);
Vocabulary read_vocabulary(std::istream& in);

}  // namespace jointtag
