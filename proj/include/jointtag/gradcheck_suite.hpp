#pragma once

#include <cstddef>
#include <vector>

#include "jointtag/corpus.hpp"
#include "jointtag/diffnet.hpp"
#include "jointtag/models.hpp"

namespace jointtag {

// A 3-token sentence with 2-3 candidate analyses per token (plus one
// single-candidate sentence so the vocabulary has more than one entry).
Corpus gradcheck_fixture();

struct ArchitectureGradCheck {
  Architecture arch = Architecture::kNer;
  nn::GradCheckResult result;
  std::size_t parameters = 0;
};

// Finite-difference check of total_loss (eval mode) for one architecture,
// all dimensions set to `dims`, on the first sentence of the fixture.
ArchitectureGradCheck gradcheck_architecture(Architecture arch, std::size_t dims = 4, double eps = 1e-4,
                                             std::uint64_t seed = 11);

std::vector<ArchitectureGradCheck> gradcheck_all(std::size_t dims = 4, double eps = 1e-4, std::uint64_t seed = 11);

}  // namespace jointtag
