#include "jointtag/vocabulary.hpp"

#include <istream>
#include <ostream>

#include "jointtag/errors.hpp"
#include "jointtag/utf8.hpp"

namespace jointtag {

IdMap::IdMap(bool with_unk) : has_unk_(with_unk) {
  if (with_unk) add(kUnkToken);
}

int IdMap::add(const std::string& token) {
  const auto [it, inserted] = ids_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int IdMap::id(const std::string& token) const {
  if (const auto it = ids_.find(token); it != ids_.end()) return it->second;
  if (has_unk_) return 0;
  throw DataError("unknown key '" + token + "' in a map without UNK");
}

Vocabulary build_vocabularies(const Corpus& corpus) {
  Vocabulary v;
  const auto add_analysis = [&v](const MorphAnalysis& a) {
    for (const auto& tag : a.tags) v.morphtags.add(tag);
    for (const auto& ch : utf8::split_code_points(a.raw)) v.analysis_chars.add(ch);
  };
  for (const auto& sentence : corpus) {
    for (const auto& tok : sentence.tokens) {
      v.words.add(tok.surface);
      for (const auto& ch : utf8::split_code_points(tok.surface)) v.chars.add(ch);
      v.ner_labels.add(tok.ner_label);
      for (const auto& cand : tok.candidates) add_analysis(cand);
      add_analysis(tok.gold_analysis);
    }
  }
  return v;
}

namespace {

struct Section {
  const char* name;
  IdMap Vocabulary::*map;
};

constexpr Section kSections[] = {
    {"words", &Vocabulary::words},
    {"chars", &Vocabulary::chars},
    {"morphtags", &Vocabulary::morphtags},
    {"ner_labels", &Vocabulary::ner_labels},
    {"analysis_chars", &Vocabulary::analysis_chars},
};

}  // namespace

void write_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  for (const auto& section : kSections) {
    out << "#SECTION " << section.name << '\n';
    const IdMap& map = vocab.*section.map;
    for (std::size_t i = 0; i < map.size(); ++i) out << i << '\t' << map.token(static_cast<int>(i)) << '\n';
  }
}

Vocabulary read_vocabulary(std::istream& in) {
  Vocabulary v;
  IdMap* current = nullptr;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#SECTION ", 0) == 0) {
      const std::string name = line.substr(9);
      current = nullptr;
      for (const auto& section : kSections) {
        if (name == section.name) current = &(v.*section.map);
      }
      if (current == nullptr) throw DataError("unknown vocabulary section '" + name + "'");
      *current = IdMap(current->has_unk());
      continue;
    }
    if (current == nullptr) throw DataError("vocabulary entry before any #SECTION header");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("malformed vocabulary line '" + line + "'");
    const int expected = static_cast<int>(current->size());
    const int id = std::stoi(line.substr(0, tab));
    const std::string token = line.substr(tab + 1);
    if (id == 0 && current->has_unk()) {
      if (token != kUnkToken) throw DataError("section must start with " + std::string(kUnkToken));
      continue;
    }
    if (id != expected || current->contains(token)) {
      throw DataError("non-contiguous or duplicate vocabulary entry '" + line + "'");
    }
    current->add(token);
  }
  return v;
}

}  // namespace jointtag
