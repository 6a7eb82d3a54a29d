#include "tgclstm/lsgc.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tgclstm/errors.hpp"

namespace tgclstm {

Matrix laplacian(const AdjacencyMatrix& adjacency) {
  const std::size_t n = adjacency.size();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      degree += adjacency.values(i, j);
      l(i, j) = -adjacency.values(i, j);
    }
    l(i, i) = degree - adjacency.values(i, i);
  }
  return l;
}

LSGCLayer::LSGCLayer(const Matrix& laplacian_matrix, int order)
    : theta("lsgc.theta", Matrix(static_cast<std::size_t>(std::max(order, 0)), 1)),
      laplacian_(laplacian_matrix) {
  if (order < 1) throw std::invalid_argument("LSGCLayer: order must be >= 1");
  if (laplacian_matrix.rows() != laplacian_matrix.cols()) {
    throw ShapeError("LSGCLayer: Laplacian must be square");
  }
  powers_.push_back(Matrix::identity(laplacian_matrix.rows()));
  for (int j = 1; j < order; ++j) powers_.push_back(matmul(powers_.back(), laplacian_matrix));
}

Vector lsgc_forward(const LSGCLayer& layer, std::span<const double> x) {
  if (x.size() != layer.nodes()) throw ShapeError("lsgc_forward: input length mismatch");
  Vector y(x.size(), 0.0);
  auto theta = layer.theta.value.values();
  for (int j = 0; j < layer.order(); ++j) {
    const Vector term = matvec(layer.power(j), x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += theta[static_cast<std::size_t>(j)] * term[i];
  }
  return y;
}

Vector lsgc_backward(LSGCLayer& layer, std::span<const double> x, std::span<const double> g) {
  if (x.size() != layer.nodes() || g.size() != layer.nodes()) {
    throw ShapeError("lsgc_backward: length mismatch");
  }
  Vector dx(x.size(), 0.0);
  auto theta = layer.theta.value.values();
  auto dtheta = layer.theta.grad.values();
  for (int j = 0; j < layer.order(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const Vector term = matvec(layer.power(j), x);
    double dot = 0.0;
    for (std::size_t i = 0; i < term.size(); ++i) dot += term[i] * g[i];
    dtheta[jj] += dot;
    const Vector back = matvec_transposed(layer.power(j), g);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += theta[jj] * back[i];
  }
  return dx;
}

LSGCLSTMTape lsgc_lstm_forward(const LSGCLSTM& model, const Matrix& inputs) {
  if (inputs.cols() != model.conv.nodes()) throw ShapeError("lsgc_lstm_forward: width mismatch");
  if (model.gates.input_size() != model.conv.nodes()) {
    throw ShapeError("lsgc_lstm_forward: LSTM input size must equal node count");
  }
  LSGCLSTMTape tape;
  tape.inputs = inputs;
  tape.filtered = Matrix(inputs.rows(), inputs.cols());
  for (std::size_t t = 0; t < inputs.rows(); ++t) {
    require_finite(inputs.row(t), "input row " + std::to_string(t));
    const Vector y = lsgc_forward(model.conv, inputs.row(t));
    std::copy(y.begin(), y.end(), tape.filtered.row(t).begin());
  }
  tape.lstm = vanilla_lstm_forward_sequence(model.gates, tape.filtered);
  return tape;
}

Matrix lsgc_lstm_backward(LSGCLSTM& model, LSGCLSTMTape& tape, std::span<const double> d_h_last) {
  if (tape.consumed) throw std::logic_error("LSGC-LSTM tape already consumed by a backward pass");
  tape.consumed = true;
  const Matrix d_filtered = vanilla_lstm_backward_sequence(model.gates, tape.lstm, d_h_last);
  Matrix d_inputs(tape.inputs.rows(), tape.inputs.cols());
  for (std::size_t t = 0; t < tape.inputs.rows(); ++t) {
    const Vector dx = lsgc_backward(model.conv, tape.inputs.row(t), d_filtered.row(t));
    std::copy(dx.begin(), dx.end(), d_inputs.row(t).begin());
  }
  return d_inputs;
}

}  // namespace tgclstm
