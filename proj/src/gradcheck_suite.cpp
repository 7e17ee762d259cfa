#include "jointtag/gradcheck_suite.hpp"

#include <sstream>

namespace jointtag {

Corpus gradcheck_fixture() {
  std::istringstream in(
      "Ali'nin\tB-PER\tAli+Noun+Prop+A3sg+Pnon+Gen\tAli+Noun+Prop+A3sg+Pnon+Nom Ali+Noun+Prop+A3sg+Pnon+Gen\n"
      "Moda'da\tB-LOC\tModa+Noun+Prop+A3sg+Pnon+Loc\tModa+Noun+Prop+A3sg+Pnon+Loc moda+Noun+A3sg+Pnon+Loc "
      "Moda+Noun+Prop+A3sg+P2sg+Loc\n"
      "evi\tO\tev+Noun+A3sg+Pnon+Acc\tev+Noun+A3sg+P3sg+Nom ev+Noun+A3sg+Pnon+Acc evi+Noun\n"
      "\n"
      "geldi\tO\tgel+Verb+Pos+Past+A3sg\tgel+Verb+Pos+Past+A3sg\n");
  return read_corpus(in, "<gradcheck fixture>");
}

ArchitectureGradCheck gradcheck_architecture(Architecture arch, std::size_t dims, double eps, std::uint64_t seed) {
  const Corpus corpus = gradcheck_fixture();
  HyperParams hyper = HyperParams::with_dims(dims);
  hyper.dropout_rate = 0.0;
  Model model(arch, hyper, build_vocabularies(corpus), seed);
  const EncodedSentence sentence = model.encode(corpus.front());
  nn::Rng rng(0);
  ArchitectureGradCheck out;
  out.arch = arch;
  out.parameters = model.params().scalar_count();
  out.result = nn::grad_check(
      [&](nn::Graph& g) { return model.total_loss(g, sentence, nn::Mode::kEval, rng); }, model.params(), eps);
  return out;
}

std::vector<ArchitectureGradCheck> gradcheck_all(std::size_t dims, double eps, std::uint64_t seed) {
  std::vector<ArchitectureGradCheck> out;
  for (const Architecture a : kAllArchitectures) out.push_back(gradcheck_architecture(a, dims, eps, seed));
  return out;
}

}  // namespace jointtag
