#include "tgclstm/forecaster.hpp"

#include <stdexcept>
#include <string>

#include "tgclstm/errors.hpp"
#include "tgclstm/loss.hpp"

namespace tgclstm {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTgcLstm:
      return "tgc-lstm";
    case ModelKind::kLstm:
      return "lstm";
    case ModelKind::kLsgcLstm:
      return "lsgc-lstm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "tgc-lstm") return ModelKind::kTgcLstm;
  if (name == "lstm") return ModelKind::kLstm;
  if (name == "lsgc-lstm") return ModelKind::kLsgcLstm;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected tgc-lstm, lstm or lsgc-lstm)");
}

void ModelStructure::validate() const {
  if (nodes == 0) throw ValidationError("model structure: node count must be positive");
  switch (kind) {
    case ModelKind::kTgcLstm:
      if (order < 1 || hop_masks.size() != static_cast<std::size_t>(order)) {
        throw ValidationError("TGC-LSTM structure needs one mask per hop");
      }
      for (const auto& m : hop_masks) {
        if (m.rows() != nodes || m.cols() != nodes) {
          throw ShapeError("TGC-LSTM mask is " + shape_string(m) + ", expected " +
                           std::to_string(nodes) + "x" + std::to_string(nodes));
        }
      }
      break;
    case ModelKind::kLsgcLstm:
      if (order < 1) throw ValidationError("LSGC-LSTM structure needs order >= 1");
      if (laplacian.rows() != nodes || laplacian.cols() != nodes) {
        throw ShapeError("LSGC-LSTM Laplacian has the wrong shape");
      }
      break;
    case ModelKind::kLstm:
      break;
  }
}

ModelStructure make_structure(ModelKind kind, const GraphMatrices& graph, int order) {
  ModelStructure s;
  s.kind = kind;
  s.nodes = graph.adjacency.size();
  switch (kind) {
    case ModelKind::kTgcLstm:
      s.order = order;
      for (int k = 1; k <= order; ++k) {
        s.hop_masks.push_back(support_mask(khop_neighborhood(graph.adjacency, k), graph.ffr).values);
      }
      break;
    case ModelKind::kLsgcLstm:
      s.order = order;
      s.laplacian = laplacian(graph.adjacency);
      break;
    case ModelKind::kLstm:
      s.order = 0;
      break;
  }
  s.validate();
  return s;
}

std::vector<const Parameter*> Forecaster::parameters() const {
  auto mutable_params = const_cast<Forecaster*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

void Forecaster::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

// TGC-LSTM

TGCLSTMForecaster::TGCLSTMForecaster(ModelStructure structure, std::uint64_t seed)
    : structure_(std::move(structure)) {
  if (structure_.kind != ModelKind::kTgcLstm) throw ValidationError("expected a TGC-LSTM structure");
  structure_.validate();
  cell_ = TGCLSTMCell(structure_.hop_masks);
  Rng rng(seed);
  cell_.init(rng);
}

Vector TGCLSTMForecaster::predict(const Matrix& window) const {
  return forward_sequence(cell_, window).prediction();
}

SampleLoss TGCLSTMForecaster::accumulate_sample(const Matrix& window,
                                                std::span<const double> target, double lambda2,
                                                double scale) {
  TGCLSTMTape tape = forward_sequence(cell_, window);
  TotalLoss loss = total_loss(tape.prediction(), target, nullptr, &tape.final_features(), 0.0,
                              lambda2);
  for (double& g : loss.d_prediction) g *= scale;
  for (double& g : loss.d_features) g *= scale;
  backward_sequence(cell_, tape, loss.d_prediction,
                    lambda2 != 0.0 ? std::span<const double>(loss.d_features)
                                   : std::span<const double>{});
  return {loss.mse, loss.feature_l2};
}

double TGCLSTMForecaster::weight_penalty() const { return reg_weight_l1(cell_.tgc); }

double TGCLSTMForecaster::accumulate_weight_penalty(double lambda1) {
  if (lambda1 != 0.0) reg_weight_l1_backward(cell_.tgc, lambda1);
  return reg_weight_l1(cell_.tgc);
}

double TGCLSTMForecaster::feature_penalty(const Matrix& window) const {
  return reg_feature_l2(forward_sequence(cell_, window).final_features()).value;
}

std::vector<Parameter*> TGCLSTMForecaster::parameters() {
  std::vector<Parameter*> out;
  cell_.collect(out);
  return out;
}

// Vanilla LSTM

LSTMForecaster::LSTMForecaster(ModelStructure structure, std::uint64_t seed)
    : structure_(std::move(structure)) {
  if (structure_.kind != ModelKind::kLstm) throw ValidationError("expected an LSTM structure");
  structure_.validate();
  gates_ = GateParams("lstm", structure_.nodes, structure_.nodes);
  Rng rng(seed);
  gates_.init(rng);
}

Vector LSTMForecaster::predict(const Matrix& window) const {
  return vanilla_lstm_forward_sequence(gates_, window).prediction();
}

SampleLoss LSTMForecaster::accumulate_sample(const Matrix& window, std::span<const double> target,
                                             double /*lambda2*/, double scale) {
  LSTMTape tape = vanilla_lstm_forward_sequence(gates_, window);
  TotalLoss loss = total_loss(tape.prediction(), target, nullptr, nullptr, 0.0, 0.0);
  for (double& g : loss.d_prediction) g *= scale;
  vanilla_lstm_backward_sequence(gates_, tape, loss.d_prediction);
  return {loss.mse, 0.0};
}

std::vector<Parameter*> LSTMForecaster::parameters() {
  std::vector<Parameter*> out;
  gates_.collect(out);
  return out;
}

// LSGC + LSTM

LSGCLSTMForecaster::LSGCLSTMForecaster(ModelStructure structure, std::uint64_t seed)
    : structure_(std::move(structure)) {
  if (structure_.kind != ModelKind::kLsgcLstm) {
    throw ValidationError("expected an LSGC-LSTM structure");
  }
  structure_.validate();
  model_.conv = LSGCLayer(structure_.laplacian, structure_.order);
  model_.gates = GateParams("lstm", structure_.nodes, structure_.nodes);
  Rng rng(seed);
  init_uniform_fan_in(model_.conv.theta, rng);
  model_.gates.init(rng);
}

Vector LSGCLSTMForecaster::predict(const Matrix& window) const {
  return lsgc_lstm_forward(model_, window).prediction();
}

SampleLoss LSGCLSTMForecaster::accumulate_sample(const Matrix& window,
                                                 std::span<const double> target,
                                                 double /*lambda2*/, double scale) {
  LSGCLSTMTape tape = lsgc_lstm_forward(model_, window);
  TotalLoss loss = total_loss(tape.prediction(), target, nullptr, nullptr, 0.0, 0.0);
  for (double& g : loss.d_prediction) g *= scale;
  lsgc_lstm_backward(model_, tape, loss.d_prediction);
  return {loss.mse, 0.0};
}

std::vector<Parameter*> LSGCLSTMForecaster::parameters() {
  std::vector<Parameter*> out{&model_.conv.theta};
  model_.gates.collect(out);
  return out;
}

std::unique_ptr<Forecaster> make_forecaster(ModelStructure structure, std::uint64_t seed) {
  switch (structure.kind) {
    case ModelKind::kTgcLstm:
      return std::make_unique<TGCLSTMForecaster>(std::move(structure), seed);
    case ModelKind::kLstm:
      return std::make_unique<LSTMForecaster>(std::move(structure), seed);
    case ModelKind::kLsgcLstm:
      return std::make_unique<LSGCLSTMForecaster>(std::move(structure), seed);
  }
  throw ValidationError("unknown model kind");
}

}  // namespace tgclstm
