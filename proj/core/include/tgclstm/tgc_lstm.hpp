#pragma once

#include <span>
#include <vector>

#include "tgclstm/lstm.hpp"
#include "tgclstm/tgc.hpp"

namespace tgclstm {

/// LSTM whose input is the flattened K-hop traffic graph convolution of x_t and
/// whose previous cell state is mixed across neighbours before the forget gate:
///
///   C*_{t−1} = (W_N ⊙ Ã^K ⊙ FFR) C_{t−1}
///   C_t      = f_t ⊙ C*_{t−1} + i_t ⊙ C̃_t
///   h_t      = o_t ⊙ tanh(C_t)
///
/// Hidden size equals the node count. U_* stay dense.
class TGCLSTMCell {
 public:
  TGCLSTMCell() = default;
  /// `hop_masks[k−1]` is Ã^k ⊙ FFR; the last one also masks W_N.
  explicit TGCLSTMCell(std::span<const Matrix> hop_masks);

  /// Gate and TGC weights uniform in ±1/√fan_in, then masked; biases zero.
  /// W_N starts as the row average over its support, so C* is the mean of
  /// the neighbouring cell states.
  void init(Rng& rng);

  std::size_t nodes() const noexcept { return tgc.nodes(); }
  int order() const noexcept { return tgc.order(); }

  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

  TGCLayer tgc;
  GateParams gates;
  Parameter neighbor;  // W_N
};

struct TGCLSTMState {
  Vector h;
  Vector c;
};

struct TGCLSTMStepCache {
  Vector x;
  TGCFeatures features;
  Vector h_prev;
  Vector c_prev;
  Vector c_star;
  GateActivations gates;
  Vector c;
  Vector tanh_c;
  Vector h;
};

TGCLSTMStepCache cell_step(const TGCLSTMCell& cell, std::span<const double> x,
                           const TGCLSTMState& prev);

struct TGCLSTMTape {
  std::vector<TGCLSTMStepCache> steps;
  bool consumed = false;

  const Vector& prediction() const { return steps.back().h; }
  const TGCFeatures& final_features() const { return steps.back().features; }
};

/// Iterates cell_step over the rows of X_T (T × N) from h_0 = C_0 = 0. The
/// prediction of x_{T+1} is h_T.
TGCLSTMTape forward_sequence(const TGCLSTMCell& cell, const Matrix& inputs);

/// Reverse-mode pass from ∂L/∂h_T and, optionally, ∂L/∂GC_T (the gradient of a
/// penalty on the final step's features). Accumulates every parameter
/// gradient and returns ∂L/∂X_T. A tape can be consumed once.
Matrix backward_sequence(TGCLSTMCell& cell, TGCLSTMTape& tape, std::span<const double> d_h_last,
                         std::span<const double> d_final_features = {});

}  // namespace tgclstm
