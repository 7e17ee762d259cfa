#include "jointtag/hyperparams.hpp"

#include <string>

#include "jointtag/errors.hpp"

namespace jointtag {

void HyperParams::validate(bool md_active) const {
  if (w_d == 0 || ch_d == 0 || mt_d == 0 || p == 0) {
    throw ConfigError("all dimension sizes (w_d, ch_d, mt_d, p) must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(singleton_unk_rate >= 0.0 && singleton_unk_rate <= 1.0)) {
    throw ConfigError("singleton_unk_rate must lie in [0, 1]");
  }
  if (md_active && p != mt_d) {
    throw ConfigError("context size 2p must equal analysis size 2mt_d for the MD dot product: p=" +
                      std::to_string(p) + ", mt_d=" + std::to_string(mt_d));
  }
}

}  // namespace jointtag
