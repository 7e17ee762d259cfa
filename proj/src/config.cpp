#include "jointtag/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "jointtag/errors.hpp"

namespace jointtag {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in, path);
}

void write_key_values(const KeyValues& kv, std::ostream& out) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
  }
}

long long get_int(const KeyValues& kv, const std::string& key, long long fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': not an integer: '" + s + "'");
  }
  return v;
}

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

HyperParams hyper_from(const KeyValues& kv, HyperParams h) {
  const auto size = [&](const char* key, std::size_t fallback) {
    const long long v = get_int(kv, key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  };
  h.w_d = size("w_d", h.w_d);
  h.ch_d = size("ch_d", h.ch_d);
  h.mt_d = size("mt_d", h.mt_d);
  h.p = size("p", h.p);
  h.dropout_rate = get_double(kv, "dropout", h.dropout_rate);
  h.epochs = size("epochs", h.epochs);
  h.batch_size = size("batch_size", h.batch_size);
  h.learning_rate = get_double(kv, "lr", h.learning_rate);
  h.beta1 = get_double(kv, "beta1", h.beta1);
  h.beta2 = get_double(kv, "beta2", h.beta2);
  h.epsilon = get_double(kv, "epsilon", h.epsilon);
  h.seed = static_cast<std::uint64_t>(get_int(kv, "seed", static_cast<long long>(h.seed)));
  h.singleton_unk_rate = get_double(kv, "singleton_unk_rate", h.singleton_unk_rate);
  return h;
}

KeyValues hyper_to(const HyperParams& h) {
  return {
      {"w_d", std::to_string(h.w_d)},
      {"ch_d", std::to_string(h.ch_d)},
      {"mt_d", std::to_string(h.mt_d)},
      {"p", std::to_string(h.p)},
      {"dropout", format_double(h.dropout_rate)},
      {"epochs", std::to_string(h.epochs)},
      {"batch_size", std::to_string(h.batch_size)},
      {"lr", format_double(h.learning_rate)},
      {"beta1", format_double(h.beta1)},
      {"beta2", format_double(h.beta2)},
      {"epsilon", format_double(h.epsilon)},
      {"seed", std::to_string(h.seed)},
      {"singleton_unk_rate", format_double(h.singleton_unk_rate)},
  };
}

}  // namespace jointtag
