#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgclstm/matrix.hpp"
#include "tgclstm/parameter.hpp"

namespace tgclstm {

enum Gate : std::size_t { kForget = 0, kInput = 1, kOutput = 2, kCandidate = 3 };
inline constexpr std::array<std::string_view, 4> kGateNames{"forget", "input", "output",
                                                            "candidate"};

/// W (hidden × input), U (hidden × hidden) and b (hidden × 1) for each of the
/// four LSTM gates.
struct GateParams {
  GateParams() = default;
  GateParams(const std::string& prefix, std::size_t hidden, std::size_t input);

  std::array<Parameter, 4> input;
  std::array<Parameter, 4> recurrent;
  std::array<Parameter, 4> bias;

  std::size_t hidden_size() const noexcept { return recurrent[0].rows(); }
  std::size_t input_size() const noexcept { return input[0].cols(); }

  /// W and U uniform in ±1/√fan_in, biases zero.
  void init(Rng& rng);
  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;
};

/// Activations of one step: f, i, o ∈ (0,1) and the candidate C̃ ∈ (−1,1).
struct GateActivations {
  std::array<Vector, 4> values;
  const Vector& operator[](Gate g) const { return values[g]; }
};

/// σ/tanh of W·input + U·h_prev + b. Throws NumericError naming the gate if a
/// pre-activation is not finite.
GateActivations compute_gates(const GateParams& params, std::span<const double> input,
                              std::span<const double> h_prev);

/// Given ∂L/∂(gate outputs), accumulates parameter gradients and adds the
/// input and previous-hidden gradients into `d_input` and `d_h_prev`.
void backward_gates(GateParams& params, const GateActivations& acts,
                    const std::array<Vector, 4>& d_gate_outputs, std::span<const double> input,
                    std::span<const double> h_prev, std::span<double> d_input,
                    std::span<double> d_h_prev);

struct LSTMState {
  Vector h;
  Vector c;
};

/// Everything one step keeps for the backward pass.
struct LSTMStepCache {
  Vector input;
  Vector h_prev;
  Vector c_prev;
  GateActivations gates;
  Vector c;
  Vector tanh_c;
  Vector h;
};

LSTMStepCache vanilla_lstm_step(const GateParams& params, std::span<const double> x,
                                const LSTMState& prev);

struct LSTMTape {
  std::vector<LSTMStepCache> steps;
  bool consumed = false;

  const Vector& prediction() const { return steps.back().h; }
};

/// Runs T steps from h_0 = C_0 = 0 over the rows of `inputs` (T × input).
LSTMTape vanilla_lstm_forward_sequence(const GateParams& params, const Matrix& inputs);

/// BPTT from ∂L/∂h_T. Accumulates into the gate gradients and returns
/// ∂L/∂inputs (T × input). Throws std::logic_error if the tape was consumed.
Matrix vanilla_lstm_backward_sequence(GateParams& params, LSTMTape& tape,
                                      std::span<const double> d_h_last);

}  // namespace tgclstm
