#include "tgclstm/tgc_lstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tgclstm/errors.hpp"

namespace tgclstm {

TGCLSTMCell::TGCLSTMCell(std::span<const Matrix> hop_masks) : tgc(hop_masks) {
  if (hop_masks.empty()) throw std::invalid_argument("TGCLSTMCell: need at least one hop");
  const std::size_t n = hop_masks.front().rows();
  for (const auto& m : hop_masks) {
    if (m.rows() != n || m.cols() != n) throw ShapeError("TGCLSTMCell: masks must all be N x N");
  }
  gates = GateParams("cell", n, n * hop_masks.size());
  neighbor = Parameter("cell.w_n", hop_masks.back(), hop_masks.back());
}

void TGCLSTMCell::init(Rng& rng) {
  for (Parameter& w : tgc.weights()) init_uniform_fan_in(w, rng);
  gates.init(rng);
  const Matrix& mask = *neighbor.mask;
  for (std::size_t i = 0; i < mask.rows(); ++i) {
    double support = 0.0;
    for (double m : mask.row(i)) support += m;
    for (std::size_t j = 0; j < mask.cols(); ++j) neighbor.value(i, j) = mask(i, j) / support;
  }
}

void TGCLSTMCell::collect(std::vector<Parameter*>& out) {
  for (Parameter& w : tgc.weights()) out.push_back(&w);
  gates.collect(out);
  out.push_back(&neighbor);
}

void TGCLSTMCell::collect(std::vector<const Parameter*>& out) const {
  for (const Parameter& w : tgc.weights()) out.push_back(&w);
  gates.collect(out);
  out.push_back(&neighbor);
}

TGCLSTMStepCache cell_step(const TGCLSTMCell& cell, std::span<const double> x,
                           const TGCLSTMState& prev) {
  const std::size_t n = cell.nodes();
  if (x.size() != n || prev.h.size() != n || prev.c.size() != n) {
    throw ShapeError("cell_step: input or state length differs from node count " +
                     std::to_string(n));
  }
  TGCLSTMStepCache s;
  s.x.assign(x.begin(), x.end());
  s.h_prev = prev.h;
  s.c_prev = prev.c;
  s.features = tgc_forward(cell.tgc, x);
  require_finite(s.features.flat, "traffic graph convolution");
  s.gates = compute_gates(cell.gates, s.features.flat, prev.h);
  s.c_star = masked_linear_forward(cell.neighbor.value, *cell.neighbor.mask, prev.c);
  require_finite(s.c_star, "cell state gate");

  const auto& g = s.gates.values;
  s.c.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.c[i] = g[kForget][i] * s.c_star[i] + g[kInput][i] * g[kCandidate][i];
  require_finite(s.c, "cell state");
  s.tanh_c = tanh(s.c);
  s.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.h[i] = g[kOutput][i] * s.tanh_c[i];
  return s;
}

TGCLSTMTape forward_sequence(const TGCLSTMCell& cell, const Matrix& inputs) {
  if (inputs.rows() == 0) throw ShapeError("forward_sequence: T must be >= 1");
  if (inputs.cols() != cell.nodes()) throw ShapeError("forward_sequence: width differs from N");
  const std::size_t n = cell.nodes();
  TGCLSTMTape tape;
  tape.steps.reserve(inputs.rows());
  TGCLSTMState state{Vector(n, 0.0), Vector(n, 0.0)};
  for (std::size_t t = 0; t < inputs.rows(); ++t) {
    require_finite(inputs.row(t), "input row " + std::to_string(t));
    tape.steps.push_back(cell_step(cell, inputs.row(t), state));
    state.h = tape.steps.back().h;
    state.c = tape.steps.back().c;
  }
  return tape;
}

Matrix backward_sequence(TGCLSTMCell& cell, TGCLSTMTape& tape, std::span<const double> d_h_last,
                         std::span<const double> d_final_features) {
  if (tape.consumed) throw std::logic_error("TGC-LSTM tape already consumed by a backward pass");
  tape.consumed = true;
  const std::size_t n = cell.nodes();
  const std::size_t kn = n * static_cast<std::size_t>(cell.order());
  if (d_h_last.size() != n) throw ShapeError("backward_sequence: dL/dh_T length differs from N");
  if (!d_final_features.empty() && d_final_features.size() != kn) {
    throw ShapeError("backward_sequence: feature gradient length differs from K*N");
  }

  Matrix d_inputs(tape.steps.size(), n);
  Vector dh(d_h_last.begin(), d_h_last.end());
  Vector dc(n, 0.0);
  for (std::size_t t = tape.steps.size(); t-- > 0;) {
    const TGCLSTMStepCache& s = tape.steps[t];
    const auto& g = s.gates.values;
    std::array<Vector, 4> d_gates{Vector(n), Vector(n), Vector(n), Vector(n)};
    Vector dc_star(n);
    for (std::size_t i = 0; i < n; ++i) {
      d_gates[kOutput][i] = dh[i] * s.tanh_c[i];
      const double dci = dc[i] + dh[i] * g[kOutput][i] * tanh_derivative_from_output(s.tanh_c[i]);
      d_gates[kForget][i] = dci * s.c_star[i];
      d_gates[kInput][i] = dci * g[kCandidate][i];
      d_gates[kCandidate][i] = dci * g[kInput][i];
      dc_star[i] = dci * g[kForget][i];
    }

    Vector d_features(kn, 0.0);
    if (t + 1 == tape.steps.size() && !d_final_features.empty()) {
      d_features.assign(d_final_features.begin(), d_final_features.end());
    }
    Vector dh_prev(n, 0.0);
    backward_gates(cell.gates, s.gates, d_gates, s.features.flat, s.h_prev, d_features, dh_prev);

    Vector dc_prev(n, 0.0);
    masked_linear_backward_accumulate(cell.neighbor.value, *cell.neighbor.mask, s.c_prev, dc_star,
                                      cell.neighbor.grad, dc_prev);

    const Vector dx = tgc_backward(cell.tgc, s.x, d_features);
    std::copy(dx.begin(), dx.end(), d_inputs.row(t).begin());
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }
  return d_inputs;
}

}  // namespace tgclstm
