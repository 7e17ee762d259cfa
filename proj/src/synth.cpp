#include "jointtag/synth.hpp"

#include <filesystem>
#include <random>
#include <set>

#include "jointtag/errors.hpp"

namespace jointtag {
namespace {

constexpr const char* kEntityTypes[] = {"PER", "LOC", "ORG"};
constexpr const char* kCaseNames[] = {"Nom", "Acc", "Dat", "Loc", "Abl", "Gen", "Ins", "Equ"};
constexpr const char* kSuffixes[] = {"de", "in", "a", "den", "i", "le", "ce", "ki"};
constexpr const char* kConsonants = "bcdfgklmnprstvyz";
constexpr const char* kVowels = "aeiou";

class Lexicon {
 public:
  explicit Lexicon(std::mt19937_64& rng) : rng_(rng) {}

  // Unique consonant-vowel strings of the given syllable count range.
  std::string fresh(std::size_t min_syll, std::size_t max_syll) {
    std::uniform_int_distribution<std::size_t> syll(min_syll, max_syll);
    std::uniform_int_distribution<int> cons(0, 15), vow(0, 4);
    while (true) {
      std::string w;
      const std::size_t n = syll(rng_);
      for (std::size_t i = 0; i < n; ++i) {
        w += kConsonants[cons(rng_)];
        w += kVowels[vow(rng_)];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::mt19937_64& rng_;
  std::set<std::string> used_;
};

MorphAnalysis analysis(const std::string& raw) { return parse_analysis(raw); }

Token make_token(const std::string& surface, const std::string& label, const std::vector<std::string>& cands,
                 std::size_t gold) {
  Token t;
  t.surface = surface;
  t.ner_label = label;
  for (const auto& c : cands) t.candidates.push_back(analysis(c));
  t.gold_analysis = t.candidates[gold];
  t.gold_index = gold;
  return t;
}

}  // namespace

std::vector<std::string> synthetic_case_names(std::size_t num_cases) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < num_cases; ++c) {
    out.push_back(c < std::size(kCaseNames) ? kCaseNames[c] : "Cas" + std::to_string(c + 1));
  }
  return out;
}

std::string synthetic_case_type(std::size_t case_index) { return kEntityTypes[case_index % 3]; }

void SyntheticSpec::validate() const {
  if (ambiguity < 1) throw ConfigError("synthetic: ambiguity must be >= 1");
  if (num_cases < 1 || num_cases % ambiguity != 0) {
    throw ConfigError("synthetic: num_cases must be a positive multiple of ambiguity");
  }
  if (min_phrases < 1 || max_phrases < min_phrases) throw ConfigError("synthetic: bad phrase count range");
  if (common_roots < 1 || proper_roots < 2 || verbs < 1 || particles_per_case < 1) {
    throw ConfigError("synthetic: lexicon sizes must be positive (proper_roots >= 2)");
  }
  if (!(entity_rate >= 0.0 && entity_rate <= 1.0) || !(multiword_rate >= 0.0 && multiword_rate <= 1.0)) {
    throw ConfigError("synthetic: rates must lie in [0, 1]");
  }
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Lexicon lex(rng);

  const std::vector<std::string> cases = synthetic_case_names(spec.num_cases);
  const std::size_t groups = spec.num_cases / spec.ambiguity;
  std::vector<std::string> suffixes;
  for (std::size_t g = 0; g < groups; ++g) {
    suffixes.push_back(g < std::size(kSuffixes) ? kSuffixes[g] : "s" + std::to_string(g));
  }

  std::vector<std::string> common, proper, verbs;
  for (std::size_t i = 0; i < spec.common_roots; ++i) common.push_back(lex.fresh(2, 3));
  for (std::size_t i = 0; i < spec.proper_roots; ++i) {
    std::string r = lex.fresh(2, 3);
    r[0] = static_cast<char>(r[0] - 'a' + 'A');
    proper.push_back(r);
  }
  for (std::size_t i = 0; i < spec.verbs; ++i) verbs.push_back(lex.fresh(2, 2) + "r");
  std::vector<std::vector<std::string>> particles(spec.num_cases);
  for (auto& list : particles) {
    for (std::size_t i = 0; i < spec.particles_per_case; ++i) list.push_back(lex.fresh(1, 2) + "n");
  }

  const auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::bernoulli_distribution is_entity(spec.entity_rate), is_multiword(spec.multiword_rate);
  std::uniform_int_distribution<std::size_t> phrase_count(spec.min_phrases, spec.max_phrases);

  const auto noun_candidates = [&](const std::string& root, bool prop, std::size_t group) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < spec.ambiguity; ++k) {
      out.push_back(root + (prop ? "+Noun+Prop+A3sg+" : "+Noun+A3sg+") + cases[group * spec.ambiguity + k]);
    }
    return out;
  };

  const auto make_sentence = [&]() {
    Sentence s;
    const std::size_t phrases = phrase_count(rng);
    for (std::size_t ph = 0; ph < phrases; ++ph) {
      const std::size_t c = pick(spec.num_cases);
      const std::size_t group = c / spec.ambiguity;
      const std::size_t gold = c % spec.ambiguity;
      if (is_entity(rng)) {
        const std::string type = synthetic_case_type(c);
        if (is_multiword(rng)) {
          const std::string first = proper[pick(proper.size())];
          s.tokens.push_back(make_token(first, "B-" + type, {first + "+Noun+Prop"}, 0));
          const std::string root = proper[pick(proper.size())];
          s.tokens.push_back(make_token(root + suffixes[group], "I-" + type, noun_candidates(root, true, group), gold));
        } else {
          const std::string root = proper[pick(proper.size())];
          s.tokens.push_back(make_token(root + suffixes[group], "B-" + type, noun_candidates(root, true, group), gold));
        }
      } else {
        const std::string root = common[pick(common.size())];
        s.tokens.push_back(make_token(root + suffixes[group], "O", noun_candidates(root, false, group), gold));
      }
      const std::string& particle = particles[c][pick(spec.particles_per_case)];
      s.tokens.push_back(make_token(particle, "O", {particle + "+Postp"}, 0));
    }
    const std::string& verb = verbs[pick(verbs.size())];
    s.tokens.push_back(make_token(verb, "O", {verb + "+Verb+Pos+A3sg"}, 0));
    return s;
  };

  SyntheticCorpus out;
  for (std::size_t i = 0; i < spec.train_sentences; ++i) out.train.push_back(make_sentence());
  for (std::size_t i = 0; i < spec.dev_sentences; ++i) out.dev.push_back(make_sentence());
  for (std::size_t i = 0; i < spec.test_sentences; ++i) out.test.push_back(make_sentence());
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_corpus(corpus.train, (base / "train.txt").string());
  write_corpus(corpus.dev, (base / "dev.txt").string());
  write_corpus(corpus.test, (base / "test.txt").string());
}

}  // namespace jointtag
