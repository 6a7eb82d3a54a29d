#pragma once

#include <span>
#include <vector>

#include "tgclstm/graph.hpp"
#include "tgclstm/lstm.hpp"
#include "tgclstm/parameter.hpp"

namespace tgclstm {

/// L = D − A.
Matrix laplacian(const AdjacencyMatrix& adjacency);

/// Polynomial spectral filter Σ_{j=0}^{K−1} θ_j L^j with K scalar coefficients.
class LSGCLayer {
 public:
  LSGCLayer() = default;
  LSGCLayer(const Matrix& laplacian, int order);

  int order() const noexcept { return static_cast<int>(powers_.size()); }
  std::size_t nodes() const noexcept { return powers_.empty() ? 0 : powers_.front().rows(); }
  const Matrix& power(int j) const { return powers_.at(static_cast<std::size_t>(j)); }
  const Matrix& laplacian() const noexcept { return laplacian_; }

  Parameter theta;  // order × 1

 private:
  Matrix laplacian_;
  std::vector<Matrix> powers_;  // L^0 .. L^{K−1}
};

Vector lsgc_forward(const LSGCLayer& layer, std::span<const double> x);
/// Accumulates ∂L/∂θ_j = (L^j x) · g and returns ∂L/∂x = Σ θ_j (L^j)^T g.
Vector lsgc_backward(LSGCLayer& layer, std::span<const double> x, std::span<const double> g);

/// One LSGC layer feeding an N-input LSTM.
struct LSGCLSTM {
  LSGCLayer conv;
  GateParams gates;
};

struct LSGCLSTMTape {
  Matrix inputs;    // raw X_T
  Matrix filtered;  // LSGC output per step
  LSTMTape lstm;
  bool consumed = false;

  const Vector& prediction() const { return lstm.prediction(); }
};

LSGCLSTMTape lsgc_lstm_forward(const LSGCLSTM& model, const Matrix& inputs);
Matrix lsgc_lstm_backward(LSGCLSTM& model, LSGCLSTMTape& tape, std::span<const double> d_h_last);

}  // namespace tgclstm
