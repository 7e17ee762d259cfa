#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "jointtag/hyperparams.hpp"

namespace jointtag {

// Flat "key = value" configuration. '#' starts a comment line; blank lines
// are ignored; later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>");
KeyValues load_key_values(const std::string& path);
void write_key_values(const KeyValues& kv, std::ostream& out);

// Hyperparameter keys: w_d ch_d mt_d p dropout epochs batch_size lr beta1
// beta2 epsilon seed singleton_unk_rate. Unknown keys are left alone.
HyperParams hyper_from(const KeyValues& kv, HyperParams base = {});
KeyValues hyper_to(const HyperParams& h);

// Typed accessors throwing ConfigError with the key name on bad values.
double get_double(const KeyValues& kv, const std::string& key, double fallback);
long long get_int(const KeyValues& kv, const std::string& key, long long fallback);
std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback);

}  // namespace jointtag
