#pragma once

#include <cstddef>
#include <cstdint>

#include "jointtag/diffnet.hpp"

namespace jointtag {

struct HyperParams {
  std::size_t w_d = 10;   // word embedding size
  std::size_t ch_d = 10;  // character embedding size (surface char Bi-LSTM cell size)
  std::size_t mt_d = 10;  // morph tag / analysis character embedding size
  std::size_t p = 10;     // sentence Bi-LSTM cell size
  double dropout_rate = 0.5;
  std::size_t epochs = 50;
  std::size_t batch_size = 5;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  // Probability of replacing a training-frequency-1 word by UNK during training.
  double singleton_unk_rate = 0.5;

  nn::AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }

  // Every dimension set to the same size.
  static HyperParams with_dims(std::size_t d) {
    HyperParams h;
    h.w_d = h.ch_d = h.mt_d = h.p = d;
    return h;
  }

  // Throws ConfigError. MD heads need p == mt_d (h_i . ma_ij dimension).
  void validate(bool md_active) const;
};

}  // namespace jointtag
