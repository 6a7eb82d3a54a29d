#include "tgclstm/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include "tgclstm/errors.hpp"

namespace tgclstm {

namespace {

constexpr std::array<const char*, 4> kShort{"f", "i", "o", "c"};

}  // namespace

GateParams::GateParams(const std::string& prefix, std::size_t hidden, std::size_t input_dim) {
  for (std::size_t g = 0; g < 4; ++g) {
    input[g] = Parameter(prefix + ".w_" + kShort[g], Matrix(hidden, input_dim));
    recurrent[g] = Parameter(prefix + ".u_" + kShort[g], Matrix(hidden, hidden));
    bias[g] = Parameter(prefix + ".b_" + kShort[g], Matrix(hidden, 1));
  }
}

void GateParams::init(Rng& rng) {
  for (std::size_t g = 0; g < 4; ++g) {
    init_uniform_fan_in(input[g], rng);
    init_uniform_fan_in(recurrent[g], rng);
    bias[g].value.fill(0.0);
  }
}

void GateParams::collect(std::vector<Parameter*>& out) {
  for (auto& p : input) out.push_back(&p);
  for (auto& p : recurrent) out.push_back(&p);
  for (auto& p : bias) out.push_back(&p);
}

void GateParams::collect(std::vector<const Parameter*>& out) const {
  for (const auto& p : input) out.push_back(&p);
  for (const auto& p : recurrent) out.push_back(&p);
  for (const auto& p : bias) out.push_back(&p);
}

GateActivations compute_gates(const GateParams& params, std::span<const double> input,
                              std::span<const double> h_prev) {
  const std::size_t n = params.hidden_size();
  GateActivations acts;
  for (std::size_t g = 0; g < 4; ++g) {
    Vector z(params.bias[g].value.values().begin(), params.bias[g].value.values().end());
    matvec_accumulate(params.input[g].value, input, z);
    matvec_accumulate(params.recurrent[g].value, h_prev, z);
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(z[i])) {
        throw NumericError(std::string(kGateNames[g]) + " gate: non-finite pre-activation at node " +
                           std::to_string(i));
      }
    }
    acts.values[g] = g == kCandidate ? tanh(z) : sigmoid(z);
  }
  return acts;
}

void backward_gates(GateParams& params, const GateActivations& acts,
                    const std::array<Vector, 4>& d_gate_outputs, std::span<const double> input,
                    std::span<const double> h_prev, std::span<double> d_input,
                    std::span<double> d_h_prev) {
  for (std::size_t g = 0; g < 4; ++g) {
    const Vector dz = g == kCandidate ? tanh_backward(acts.values[g], d_gate_outputs[g])
                                      : sigmoid_backward(acts.values[g], d_gate_outputs[g]);
    outer_accumulate(dz, input, params.input[g].grad);
    outer_accumulate(dz, h_prev, params.recurrent[g].grad);
    auto db = params.bias[g].grad.values();
    for (std::size_t i = 0; i < dz.size(); ++i) db[i] += dz[i];
    matvec_transposed_accumulate(params.input[g].value, dz, d_input);
    matvec_transposed_accumulate(params.recurrent[g].value, dz, d_h_prev);
  }
}

LSTMStepCache vanilla_lstm_step(const GateParams& params, std::span<const double> x,
                                const LSTMState& prev) {
  const std::size_t n = params.hidden_size();
  if (x.size() != params.input_size() || prev.h.size() != n || prev.c.size() != n) {
    throw ShapeError("vanilla_lstm_step: input or state has the wrong length");
  }
  LSTMStepCache cache;
  cache.input.assign(x.begin(), x.end());
  cache.h_prev = prev.h;
  cache.c_prev = prev.c;
  cache.gates = compute_gates(params, x, prev.h);
  const auto& g = cache.gates.values;
  cache.c.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    cache.c[i] = g[kForget][i] * prev.c[i] + g[kInput][i] * g[kCandidate][i];
  cache.tanh_c = tanh(cache.c);
  cache.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) cache.h[i] = g[kOutput][i] * cache.tanh_c[i];
  return cache;
}

LSTMTape vanilla_lstm_forward_sequence(const GateParams& params, const Matrix& inputs) {
  if (inputs.rows() == 0) throw ShapeError("vanilla_lstm_forward_sequence: empty sequence");
  const std::size_t n = params.hidden_size();
  LSTMTape tape;
  tape.steps.reserve(inputs.rows());
  LSTMState state{Vector(n, 0.0), Vector(n, 0.0)};
  for (std::size_t t = 0; t < inputs.rows(); ++t) {
    require_finite(inputs.row(t), "input row " + std::to_string(t));
    tape.steps.push_back(vanilla_lstm_step(params, inputs.row(t), state));
    state.h = tape.steps.back().h;
    state.c = tape.steps.back().c;
  }
  return tape;
}

Matrix vanilla_lstm_backward_sequence(GateParams& params, LSTMTape& tape,
                                      std::span<const double> d_h_last) {
  if (tape.consumed) throw std::logic_error("LSTM tape already consumed by a backward pass");
  tape.consumed = true;
  const std::size_t n = params.hidden_size();
  if (d_h_last.size() != n) throw ShapeError("vanilla_lstm_backward_sequence: bad dL/dh_T length");
  Matrix d_inputs(tape.steps.size(), params.input_size());
  Vector dh(d_h_last.begin(), d_h_last.end());
  Vector dc(n, 0.0);
  for (std::size_t t = tape.steps.size(); t-- > 0;) {
    const LSTMStepCache& s = tape.steps[t];
    const auto& g = s.gates.values;
    std::array<Vector, 4> d_gates{Vector(n), Vector(n), Vector(n), Vector(n)};
    Vector dc_prev(n);
    for (std::size_t i = 0; i < n; ++i) {
      d_gates[kOutput][i] = dh[i] * s.tanh_c[i];
      const double dci = dc[i] + dh[i] * g[kOutput][i] * tanh_derivative_from_output(s.tanh_c[i]);
      d_gates[kForget][i] = dci * s.c_prev[i];
      d_gates[kInput][i] = dci * g[kCandidate][i];
      d_gates[kCandidate][i] = dci * g[kInput][i];
      dc_prev[i] = dci * g[kForget][i];
    }
    Vector dh_prev(n, 0.0);
    backward_gates(params, s.gates, d_gates, s.input, s.h_prev, d_inputs.row(t), dh_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }
  return d_inputs;
}

}  // namespace tgclstm
