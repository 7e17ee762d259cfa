#include "jointtag/diffnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "jointtag/errors.hpp"

namespace jointtag::nn {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("bad number '" + s + "' in checkpoint");
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// ParameterStore

Parameter& ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols, Init init,
                               Rng& rng) {
  if (params_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
  Parameter p;
  p.name = name;
  p.value = Tensor(rows, cols);
  p.grad = Tensor(rows, cols);
  p.m = Tensor(rows, cols);
  p.v = Tensor(rows, cols);
  switch (init) {
    case Init::kGlorot: {
      const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& x : p.value.data) x = dist(rng);
      break;
    }
    case Init::kZeros:
      break;
    case Init::kForgetBias: {
      // LSTM bias of 4h entries: forget-gate block set to 1.
      const std::size_t h = rows / 4;
      for (std::size_t i = h; i < 2 * h; ++i) p.value.data[i] = 1.0;
      break;
    }
  }
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterStore::get(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("no parameter named '" + name + "'");
  return it->second;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("no parameter named '" + name + "'");
  return it->second;
}

void ParameterStore::zero_grads() {
  for (auto& [_, p] : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

ParameterStore::Snapshot ParameterStore::snapshot() const {
  Snapshot s;
  for (const auto& [name, p] : params_) s.emplace(name, p.value);
  return s;
}

void ParameterStore::restore(const Snapshot& snap) {
  for (auto& [name, p] : params_) {
    const auto it = snap.find(name);
    if (it == snap.end()) throw ConfigError("snapshot lacks parameter '" + name + "'");
    require(it->second.rows == p.value.rows && it->second.cols == p.value.cols,
            "snapshot shape mismatch for '" + name + "'");
    p.value = it->second;
  }
}

// Format:
//   jointtag-checkpoint 1
//   tensors <count>
//   tensor <name> <rows> <cols>
//   <rows lines of cols space-separated shortest round-trip doubles>
void ParameterStore::save(std::ostream& out) const {
  out << "jointtag-checkpoint 1\n";
  out << "tensors " << params_.size() << '\n';
  for (const auto& [name, p] : params_) {
    out << "tensor " << name << ' ' << p.value.rows << ' ' << p.value.cols << '\n';
    for (std::size_t r = 0; r < p.value.rows; ++r) {
      for (std::size_t c = 0; c < p.value.cols; ++c) {
        if (c) out << ' ';
        out << format_double(p.value.at(r, c));
      }
      out << '\n';
    }
  }
}

void ParameterStore::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "jointtag-checkpoint" || version != 1) throw DataError("not a jointtag checkpoint");
  std::string word;
  std::size_t count = 0;
  in >> word >> count;
  if (word != "tensors") throw DataError("checkpoint: expected 'tensors'");
  if (count != params_.size()) {
    throw DataError("checkpoint has " + std::to_string(count) + " tensors, model expects " +
                    std::to_string(params_.size()));
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    in >> word >> name >> rows >> cols;
    if (word != "tensor" || !in) throw DataError("checkpoint: malformed tensor header");
    Parameter& p = get(name);
    if (p.value.rows != rows || p.value.cols != cols) {
      throw DataError("checkpoint: shape mismatch for '" + name + "'");
    }
    for (auto& x : p.value.data) {
      std::string tok;
      in >> tok;
      x = parse_double(tok);
    }
  }
  if (!in) throw DataError("checkpoint truncated");
}

// ---------------------------------------------------------------------------
// LSTM construction

LstmCell make_lstm(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                   std::size_t hidden_size, Rng& rng) {
  LstmCell cell;
  cell.W = &store.add(prefix + ".W", 4 * hidden_size, input_size, Init::kGlorot, rng);
  cell.U = &store.add(prefix + ".U", 4 * hidden_size, hidden_size, Init::kGlorot, rng);
  cell.b = &store.add(prefix + ".b", 4 * hidden_size, 1, Init::kForgetBias, rng);
  cell.input_size = input_size;
  cell.hidden_size = hidden_size;
  return cell;
}

BiLstm make_bilstm(ParameterStore& store, const std::string& prefix, std::size_t input_size,
                   std::size_t hidden_size, Rng& rng) {
  BiLstm net;
  net.fwd = make_lstm(store, prefix + ".fwd", input_size, hidden_size, rng);
  net.bwd = make_lstm(store, prefix + ".bwd", input_size, hidden_size, rng);
  return net;
}

std::size_t lstm_parameter_count(std::size_t input_size, std::size_t hidden_size) {
  return 4 * hidden_size * (input_size + hidden_size + 1);
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::push(Vec value, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), {}, std::move(backward)});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::custom(Vec value, BackwardFn backward) { return push(std::move(value), std::move(backward)); }

Var Graph::constant(Vec value) { return push(std::move(value), nullptr); }

Var Graph::param(Parameter& p) {
  return push(p.value.data, [&p](Graph&, const Vec& g) {
    for (std::size_t i = 0; i < g.size(); ++i) p.grad.data[i] += g[i];
  });
}

Var Graph::lookup(Parameter& table, std::size_t row) {
  require(row < table.value.rows, "embedding row out of range in '" + table.name + "'");
  const std::size_t d = table.value.cols;
  Vec v(table.value.data.begin() + static_cast<std::ptrdiff_t>(row * d),
        table.value.data.begin() + static_cast<std::ptrdiff_t>((row + 1) * d));
  return push(std::move(v), [&table, row, d](Graph&, const Vec& g) {
    double* dst = table.grad.data.data() + row * d;
    for (std::size_t i = 0; i < d; ++i) dst[i] += g[i];
  });
}

Var Graph::affine(Parameter& W, Parameter* b, Var x) {
  const std::size_t rows = W.value.rows, cols = W.value.cols;
  const Vec& xv = value(x);
  require(xv.size() == cols, "affine: '" + W.name + "' expects input " + std::to_string(cols) +
                                 ", got " + std::to_string(xv.size()));
  if (b) require(b->value.size() == rows, "affine: bias '" + b->name + "' size mismatch");
  Vec out(rows);
  const double* w = W.value.data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b ? b->value.data[r] : 0.0;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * xv[c];
    out[r] = acc;
  }
  return push(std::move(out), [&W, b, x, rows, cols](Graph& gr, const Vec& g) {
    const Vec& xv = gr.value(x);
    Vec& dx = gr.grad(x);
    const double* w = W.value.data.data();
    double* dw = W.grad.data.data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double gr_r = g[r];
      if (gr_r == 0.0) continue;
      const double* wr = w + r * cols;
      double* dwr = dw + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        dwr[c] += gr_r * xv[c];
        dx[c] += gr_r * wr[c];
      }
    }
    if (b) {
      for (std::size_t r = 0; r < rows; ++r) b->grad.data[r] += g[r];
    }
  });
}

Var Graph::add(Var a, Var b) {
  const Vec& av = value(a);
  const Vec& bv = value(b);
  require(av.size() == bv.size(), "add: size mismatch");
  Vec out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return push(std::move(out), [a, b](Graph& gr, const Vec& g) {
    Vec& da = gr.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    Vec& db = gr.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
  });
}

Var Graph::tanh(Var x) {
  Vec out = value(x);
  for (auto& v : out) v = std::tanh(v);
  const int self = static_cast<int>(nodes_.size());
  return push(std::move(out), [x, self](Graph& gr, const Vec& g) {
    const Vec& y = gr.value(Var{self});
    Vec& dx = gr.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Graph::relu(Var x) {
  Vec out = value(x);
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return push(std::move(out), [x](Graph& gr, const Vec& g) {
    const Vec& xv = gr.value(x);
    Vec& dx = gr.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) dx[i] += g[i];
    }
  });
}

Var Graph::concat(std::span<const Var> parts) {
  Vec out;
  std::vector<std::pair<Var, std::size_t>> layout;
  layout.reserve(parts.size());
  for (const Var p : parts) {
    const Vec& v = value(p);
    layout.emplace_back(p, v.size());
    out.insert(out.end(), v.begin(), v.end());
  }
  return push(std::move(out), [layout = std::move(layout)](Graph& gr, const Vec& g) {
    std::size_t offset = 0;
    for (const auto& [p, n] : layout) {
      Vec& dp = gr.grad(p);
      for (std::size_t i = 0; i < n; ++i) dp[i] += g[offset + i];
      offset += n;
    }
  });
}

Var Graph::slice(Var x, std::size_t offset, std::size_t length) {
  const Vec& xv = value(x);
  require(offset + length <= xv.size(), "slice out of range");
  Vec out(xv.begin() + static_cast<std::ptrdiff_t>(offset),
          xv.begin() + static_cast<std::ptrdiff_t>(offset + length));
  return push(std::move(out), [x, offset](Graph& gr, const Vec& g) {
    Vec& dx = gr.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[offset + i] += g[i];
  });
}

Var Graph::dot(Var a, Var b) {
  const Vec& av = value(a);
  const Vec& bv = value(b);
  require(av.size() == bv.size(), "dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  return push(Vec{acc}, [a, b](Graph& gr, const Vec& g) {
    const Vec& av = gr.value(a);
    const Vec& bv = gr.value(b);
    Vec& da = gr.grad(a);
    Vec& db = gr.grad(b);
    for (std::size_t i = 0; i < av.size(); ++i) {
      da[i] += g[0] * bv[i];
      db[i] += g[0] * av[i];
    }
  });
}

Var Graph::sum(Var x) {
  double acc = 0.0;
  for (double v : value(x)) acc += v;
  return push(Vec{acc}, [x](Graph& gr, const Vec& g) {
    for (auto& d : gr.grad(x)) d += g[0];
  });
}

Var Graph::add_scalars(std::span<const Var> xs) {
  double acc = 0.0;
  for (const Var x : xs) acc += scalar(x);
  std::vector<Var> inputs(xs.begin(), xs.end());
  return push(Vec{acc}, [inputs = std::move(inputs)](Graph& gr, const Vec& g) {
    for (const Var x : inputs) gr.grad(x)[0] += g[0];
  });
}

Var Graph::dropout(Var x, double rate, Mode mode, Rng& rng) {
  if (mode == Mode::kEval || rate == 0.0) return x;
  const Vec& xv = value(x);
  Vec mask(xv.size());
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  Vec out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = keep(rng) ? scale : 0.0;
    out[i] = xv[i] * mask[i];
  }
  return push(std::move(out), [x, mask = std::move(mask)](Graph& gr, const Vec& g) {
    Vec& dx = gr.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * mask[i];
  });
}

Var Graph::lstm_step(const LstmCell& cell, Var x, Var state) {
  const std::size_t h = cell.hidden_size;
  const std::size_t in = cell.input_size;
  const Vec& xv = value(x);
  require(xv.size() == in, "lstm_step: '" + cell.W->name + "' expects input " + std::to_string(in) +
                               ", got " + std::to_string(xv.size()));
  const Vec zero_state(2 * h, 0.0);
  const Vec& sv = state.valid() ? value(state) : zero_state;
  require(sv.size() == 2 * h, "lstm_step: state size mismatch");

  const double* W = cell.W->value.data.data();
  const double* U = cell.U->value.data.data();
  const double* b = cell.b->value.data.data();
  // gates = [i, f, g, o] after nonlinearity
  Vec gates(4 * h);
  for (std::size_t r = 0; r < 4 * h; ++r) {
    double z = b[r];
    const double* wr = W + r * in;
    for (std::size_t c = 0; c < in; ++c) z += wr[c] * xv[c];
    const double* ur = U + r * h;
    for (std::size_t c = 0; c < h; ++c) z += ur[c] * sv[c];
    gates[r] = (r >= 2 * h && r < 3 * h) ? std::tanh(z) : sigmoid(z);
  }
  Vec out(2 * h);
  Vec tanh_c(h);
  for (std::size_t k = 0; k < h; ++k) {
    const double c_new = gates[h + k] * sv[h + k] + gates[k] * gates[2 * h + k];
    tanh_c[k] = std::tanh(c_new);
    out[k] = gates[3 * h + k] * tanh_c[k];
    out[h + k] = c_new;
  }

  return push(std::move(out), [cell, x, state, gates = std::move(gates),
                               tanh_c = std::move(tanh_c)](Graph& gr, const Vec& g) {
    const std::size_t h = cell.hidden_size;
    const std::size_t in = cell.input_size;
    const Vec zero_state(2 * h, 0.0);
    const Vec& sv = state.valid() ? gr.value(state) : zero_state;
    const Vec& xv = gr.value(x);
    Vec dz(4 * h);
    for (std::size_t k = 0; k < h; ++k) {
      const double i = gates[k], f = gates[h + k], cand = gates[2 * h + k], o = gates[3 * h + k];
      const double dh = g[k];
      const double dc = g[h + k] + dh * o * (1.0 - tanh_c[k] * tanh_c[k]);
      dz[k] = dc * cand * i * (1.0 - i);
      dz[h + k] = dc * sv[h + k] * f * (1.0 - f);
      dz[2 * h + k] = dc * i * (1.0 - cand * cand);
      dz[3 * h + k] = dh * tanh_c[k] * o * (1.0 - o);
      if (state.valid()) gr.grad(state)[h + k] += dc * f;
    }
    const double* W = cell.W->value.data.data();
    const double* U = cell.U->value.data.data();
    double* dW = cell.W->grad.data.data();
    double* dU = cell.U->grad.data.data();
    double* db = cell.b->grad.data.data();
    Vec& dx = gr.grad(x);
    for (std::size_t r = 0; r < 4 * h; ++r) {
      const double d = dz[r];
      db[r] += d;
      if (d == 0.0) continue;
      const double* wr = W + r * in;
      double* dwr = dW + r * in;
      for (std::size_t c = 0; c < in; ++c) {
        dwr[c] += d * xv[c];
        dx[c] += d * wr[c];
      }
      if (state.valid()) {
        const double* ur = U + r * h;
        double* dur = dU + r * h;
        Vec& ds = gr.grad(state);
        for (std::size_t c = 0; c < h; ++c) {
          dur[c] += d * sv[c];
          ds[c] += d * ur[c];
        }
      }
    }
  });
}

void Graph::backward(Var loss) {
  require(loss.valid() && value(loss).size() == 1, "backward: loss must be a scalar node");
  const auto last = static_cast<std::size_t>(loss.id);
  for (std::size_t i = 0; i <= last; ++i) nodes_[i].grad.assign(nodes_[i].value.size(), 0.0);
  nodes_[last].grad[0] = 1.0;
  for (std::size_t i = last + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward) continue;
    if (std::all_of(n.grad.begin(), n.grad.end(), [](double d) { return d == 0.0; })) continue;
    // The callback may touch other nodes' buffers but never reallocates nodes_.
    n.backward(*this, n.grad);
  }
}

// ---------------------------------------------------------------------------
// Value-level helpers

LstmState lstm_step(const LstmCell& cell, const Vec& x, const LstmState& state) {
  Graph g;
  Vec s = state.h;
  s.insert(s.end(), state.c.begin(), state.c.end());
  const Var out = g.lstm_step(cell, g.constant(x), g.constant(std::move(s)));
  const Vec& v = g.value(out);
  const auto h = static_cast<std::ptrdiff_t>(cell.hidden_size);
  return {Vec(v.begin(), v.begin() + h), Vec(v.begin() + h, v.end())};
}

BiLstmStates bilstm_states(Graph& g, const BiLstm& net, std::span<const Var> xs) {
  require(!xs.empty(), "bilstm: empty input sequence");
  const std::size_t n = xs.size();
  const std::size_t h = net.hidden_size();
  BiLstmStates out;
  out.fwd.resize(n);
  out.bwd.resize(n);
  Var state;
  for (std::size_t i = 0; i < n; ++i) {
    state = g.lstm_step(net.fwd, xs[i], state);
    out.fwd[i] = g.slice(state, 0, h);
  }
  state = Var{};
  for (std::size_t i = n; i-- > 0;) {
    state = g.lstm_step(net.bwd, xs[i], state);
    out.bwd[i] = g.slice(state, 0, net.bwd.hidden_size);
  }
  return out;
}

std::vector<Var> bilstm(Graph& g, const BiLstm& net, std::span<const Var> xs) {
  const BiLstmStates states = bilstm_states(g, net, xs);
  std::vector<Var> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = g.concat({states.fwd[i], states.bwd[i]});
  return out;
}

std::vector<Vec> bilstm(const BiLstm& net, const std::vector<Vec>& xs) {
  Graph g;
  std::vector<Var> in;
  for (const auto& x : xs) in.push_back(g.constant(x));
  std::vector<Vec> out;
  for (const Var v : bilstm(g, net, in)) out.push_back(g.value(v));
  return out;
}

Var fully_connected(Graph& g, Parameter& W, Parameter& b, Activation act, Var x) {
  const Var z = g.affine(W, &b, x);
  return act == Activation::kTanh ? g.tanh(z) : z;
}

Vec fully_connected(Parameter& W, Parameter& b, Activation act, const Vec& x) {
  Graph g;
  return g.value(fully_connected(g, W, b, act, g.constant(x)));
}

Vec dropout(const Vec& x, double rate, Mode mode, Rng& rng) {
  Graph g;
  return g.value(g.dropout(g.constant(x), rate, mode, rng));
}

// ---------------------------------------------------------------------------
// Optimization and verification

void adam_update(ParameterStore& params, const AdamConfig& config) {
  ++params.step_count_;
  const double t = static_cast<double>(params.step_count_);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [_, p] : params.params_) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data[i];
      double& m = p.m.data[i];
      double& v = p.v.data[i];
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v + (1.0 - config.beta2) * g * g;
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      p.value.data[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
      p.grad.data[i] = 0.0;
    }
  }
}

GradCheckResult grad_check(const std::function<Var(Graph&)>& loss_fn, ParameterStore& params,
                           double eps) {
  params.zero_grads();
  {
    Graph g;
    const Var loss = loss_fn(g);
    g.backward(loss);
  }
  const auto evaluate = [&]() {
    Graph g;
    return g.scalar(loss_fn(g));
  };
  GradCheckResult result;
  for (auto& [name, p] : params.all()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data[i];
      p.value.data[i] = saved + eps;
      const double plus = evaluate();
      p.value.data[i] = saved - eps;
      const double minus = evaluate();
      p.value.data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = p.grad.data[i];
      const double rel =
          std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-8);
      ++result.entries_checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  params.zero_grads();
  return result;
}

}  // namespace jointtag::nn
