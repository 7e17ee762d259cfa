#pragma once

// Minimal reverse-mode differentiation over dense double vectors.
//
// A Graph is a tape of nodes built for one sentence. Every node holds a
// vector value; parameters live outside the graph in a ParameterStore and
// receive gradients directly during Graph::backward. Graphs are cheap to
// create and are thrown away after each backward pass.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace jointtag::nn {

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::size_t size() const { return data.size(); }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // Adam first moment
  Tensor v;  // Adam second moment
};

enum class Init { kGlorot, kZeros, kForgetBias };

// Named parameter tensors. References returned by add()/get() stay valid for
// the lifetime of the store (node-based map), including across moves.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, std::size_t rows, std::size_t cols, Init init, Rng& rng);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  void zero_grads();
  std::size_t scalar_count() const;
  std::int64_t step_count() const { return step_count_; }

  std::map<std::string, Parameter>& all() { return params_; }
  const std::map<std::string, Parameter>& all() const { return params_; }

  using Snapshot = std::map<std::string, Tensor>;
  Snapshot snapshot() const;
  void restore(const Snapshot& snap);

  // Text checkpoint: header, then per tensor "tensor name rows cols" and rows of shortest round-trip doubles.
  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  friend void adam_update(ParameterStore&, const struct AdamConfig&);
  std::map<std::string, Parameter> params_;
  std::int64_t step_count_ = 0;
};

// Handle to a graph node.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

struct LstmCell {
  Parameter* W = nullptr;  // 4h x in, gate rows ordered input, forget, candidate, output
  Parameter* U = nullptr;  // 4h x h
  Parameter* b = nullptr;  // 4h
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
};

struct BiLstm {
  LstmCell fwd;
  LstmCell bwd;
  std::size_t hidden_size() const { return fwd.hidden_size; }
};

LstmCell make_lstm(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                   std::size_t hidden_size, Rng& rng);
BiLstm make_bilstm(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                   std::size_t hidden_size, Rng& rng);
std::size_t lstm_parameter_count(std::size_t input_size, std::size_t hidden_size);

enum class Mode { kTrain, kEval };
enum class Activation { kNone, kTanh };

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Vec& out_grad)>;

  Var constant(Vec value);
  // The whole tensor, flattened row-major.
  Var param(Parameter& p);
  Var lookup(Parameter& table, std::size_t row);
  // W x (+ b)
  Var affine(Parameter& W, Parameter* b, Var x);
  Var add(Var a, Var b);
  Var tanh(Var x);
  Var relu(Var x);
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }
  Var slice(Var x, std::size_t offset, std::size_t length);
  // Scalar nodes (size 1).
  Var dot(Var a, Var b);
  Var sum(Var x);
  Var add_scalars(std::span<const Var> xs);
  // Inverted dropout; identity in eval mode or at rate 0.
  Var dropout(Var x, double rate, Mode mode, Rng& rng);
  // One LSTM step; state is [h; c] (invalid Var = zero state). Returns [h'; c'].
  Var lstm_step(const LstmCell& cell, Var x, Var state);

  // Escape hatch for fused operations defined elsewhere (CRF, MD loss).
  Var custom(Vec value, BackwardFn backward);

  const Vec& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  double scalar(Var v) const { return value(v).front(); }
  // Gradient buffer for a node; only valid inside backward().
  Vec& grad(Var v) { return nodes_[static_cast<std::size_t>(v.id)].grad; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and accumulates into every reachable parameter.
  void backward(Var loss);

 private:
  struct Node {
    Vec value;
    Vec grad;
    BackwardFn backward;
  };
  Var push(Vec value, BackwardFn backward);
  std::vector<Node> nodes_;
};

// Value-level helpers implemented on top of Graph.
struct LstmState {
  Vec h;
  Vec c;
};
LstmState lstm_step(const LstmCell& cell, const Vec& x, const LstmState& state);

// Graph form: position i output is concat(forward h_i, backward h_i).
std::vector<Var> bilstm(Graph& g, const BiLstm& net, std::span<const Var> xs);
// Separate forward/backward hidden states per position.
struct BiLstmStates {
  std::vector<Var> fwd;
  std::vector<Var> bwd;
};
BiLstmStates bilstm_states(Graph& g, const BiLstm& net, std::span<const Var> xs);
std::vector<Vec> bilstm(const BiLstm& net, const std::vector<Vec>& xs);

Var fully_connected(Graph& g, Parameter& W, Parameter& b, Activation act, Var x);
Vec fully_connected(Parameter& W, Parameter& b, Activation act, const Vec& x);

Vec dropout(const Vec& x, double rate, Mode mode, Rng& rng);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam step over every parameter, then clears gradients.
void adam_update(ParameterStore& params, const AdamConfig& config);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

// Compares analytic gradients of loss_fn against central differences for
// every entry of every parameter. loss_fn must be deterministic.
// Per entry: |a - n| / max(|a| + |n|, 1e-8); the maximum is returned.
GradCheckResult grad_check(const std::function<Var(Graph&)>& loss_fn, ParameterStore& params,
                           double eps = 1e-4);

}  // namespace jointtag::nn
