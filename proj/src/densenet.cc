// Copyright 2026 The dwil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dwil/densenet.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "dwil/error.h"
#include "dwil/rng.h"
#include "dwil/traj.h"

namespace dwil {
namespace {

void ApplyActivation(Activation activation, Eigen::MatrixXd& z) {
  switch (activation) {
    case Activation::kTanh:
      z = z.array().tanh();
      break;
    case Activation::kRelu:
      z = z.array().max(0.0);
      break;
    case Activation::kIdentity:
      break;
  }
}

// Multiplies `grad` in place by the activation derivative, expressed through
// the activation output.
void ScaleByDerivative(Activation activation, const Eigen::MatrixXd& output,
                       Eigen::MatrixXd& grad) {
  switch (activation) {
    case Activation::kTanh:
      grad.array() *= 1.0 - output.array().square();
      break;
    case Activation::kRelu:
      grad.array() *= (output.array() > 0.0).cast<double>();
      break;
    case Activation::kIdentity:
      break;
  }
}

// dLoss/dPrediction per sample, before averaging.
Eigen::MatrixXd LossDerivative(const Eigen::MatrixXd& error, LossKind kind) {
  if (kind == LossKind::kMse) return 2.0 * error;
  return error.unaryExpr([](double e) {
    return std::abs(e) < 1.0 ? e : (e > 0.0 ? 1.0 : -1.0);
  });
}

double BatchLoss(const Eigen::MatrixXd& error, LossKind kind) {
  double total;
  if (kind == LossKind::kMse) {
    total = error.array().square().sum();
  } else {
    total = error
                .unaryExpr([](double e) {
                  double a = std::abs(e);
                  return a < 1.0 ? 0.5 * e * e : a - 0.5;
                })
                .sum();
  }
  return total / static_cast<double>(error.cols());
}

std::string ReadNonEmptyLine(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  throw FormatError("unexpected end of network checkpoint");
}

std::vector<double> ParseValues(const std::string& line) {
  std::vector<double> values;
  std::istringstream ss(line);
  std::string token;
  while (ss >> token) values.push_back(ParseDouble(token));
  return values;
}

int HeaderInt(const std::string& line, const std::string& key) {
  auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw FormatError("missing '" + key + "'");
  return std::stoi(line.substr(pos + key.size() + 1));
}

std::string HeaderWord(const std::string& line, const std::string& key) {
  auto pos = line.find(key + "=");
  if (pos == std::string::npos) throw FormatError("missing '" + key + "'");
  auto start = pos + key.size() + 1;
  auto end = line.find(' ', start);
  return line.substr(start, end == std::string::npos ? end : end - start);
}

}  // namespace

std::string_view ToString(Activation activation) {
  switch (activation) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

Activation ParseActivation(std::string_view text) {
  if (text == "tanh") return Activation::kTanh;
  if (text == "relu") return Activation::kRelu;
  if (text == "identity") return Activation::kIdentity;
  throw FormatError("unknown activation '" + std::string(text) + "'");
}

std::string_view ToString(LossKind kind) {
  return kind == LossKind::kMse ? "mse" : "smooth_l1";
}

LossKind ParseLossKind(std::string_view text) {
  if (text == "smooth_l1") return LossKind::kSmoothL1;
  if (text == "mse") return LossKind::kMse;
  throw ConfigError("unknown loss '" + std::string(text) + "'");
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  Validate();
}

DenseNet::DenseNet(const std::vector<int>& sizes,
                   const std::vector<Activation>& activations, uint64_t seed) {
  if (sizes.size() < 2 || activations.size() != sizes.size() - 1) {
    throw DimensionError("network needs sizes.size() - 1 activations");
  }
  Rng rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    int fan_in = sizes[l], fan_out = sizes[l + 1];
    if (fan_in <= 0 || fan_out <= 0) throw DimensionError("layer width must be > 0");
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = Uniform(rng, -bound, bound);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] = Uniform(rng, -bound, bound);
    }
    layer.activation = activations[l];
    layers_.push_back(std::move(layer));
  }
}

DenseNet DenseNet::Mlp(int input_dim, int hidden, int output_dim, int num_layers,
                       Activation hidden_activation,
                       Activation output_activation, uint64_t seed) {
  if (num_layers < 1) throw DimensionError("network needs at least one layer");
  std::vector<int> sizes{input_dim};
  std::vector<Activation> activations;
  for (int l = 0; l + 1 < num_layers; ++l) {
    sizes.push_back(hidden);
    activations.push_back(hidden_activation);
  }
  sizes.push_back(output_dim);
  activations.push_back(output_activation);
  return DenseNet(sizes, activations, seed);
}

int DenseNet::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

size_t DenseNet::ParameterCount() const {
  size_t n = 0;
  for (const DenseLayer& layer : layers_) {
    n += layer.weight.size() + layer.bias.size();
  }
  return n;
}

Eigen::VectorXd DenseNet::Forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw DimensionError("network input has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd a = x;
  return ForwardBatch(a).col(0);
}

Eigen::MatrixXd DenseNet::ForwardBatch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) {
    throw DimensionError("network input has " + std::to_string(inputs.rows()) +
                         " rows, expected " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd a = inputs;
  for (const DenseLayer& layer : layers_) {
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    ApplyActivation(layer.activation, z);
    a = std::move(z);
  }
  return a;
}

bool DenseNet::AllFinite() const {
  for (const DenseLayer& layer : layers_) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

void DenseNet::Validate() const {
  for (size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows()) {
      throw DimensionError("bias size mismatch in layer " + std::to_string(l));
    }
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
      throw DimensionError("layer " + std::to_string(l) +
                           " does not chain with its predecessor");
    }
  }
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& a = layers_[l];
    const DenseLayer& b = other.layers_[l];
    if (a.activation != b.activation || a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.weight != b.weight ||
        a.bias != b.bias) {
      return false;
    }
  }
  return true;
}

Gradient Gradient::ZerosLike(const DenseNet& net) {
  Gradient g;
  for (const DenseLayer& layer : net.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

double Gradient::MaxAbs() const {
  double m = 0.0;
  for (const auto& w : weight) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : bias) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double SampleLoss(const Eigen::VectorXd& prediction,
                  const Eigen::VectorXd& target, LossKind kind) {
  if (prediction.size() != target.size()) throw DimensionError("loss dimensions");
  Eigen::MatrixXd error = prediction - target;
  return BatchLoss(error, kind);
}

LossAndGradient ComputeLossAndGradient(const DenseNet& net,
                                       const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& targets,
                                       LossKind kind) {
  if (inputs.cols() == 0) throw DimensionError("empty batch");
  if (inputs.cols() != targets.cols() || targets.rows() != net.output_dim()) {
    throw DimensionError("batch inputs and targets do not match the network");
  }
  if (inputs.rows() != net.input_dim()) throw DimensionError("batch input rows");
  const auto& layers = net.layers();
  std::vector<Eigen::MatrixXd> outputs;
  outputs.reserve(layers.size() + 1);
  outputs.push_back(inputs);
  for (const DenseLayer& layer : layers) {
    Eigen::MatrixXd z = layer.weight * outputs.back();
    z.colwise() += layer.bias;
    ApplyActivation(layer.activation, z);
    outputs.push_back(std::move(z));
  }
  Eigen::MatrixXd error = outputs.back() - targets;
  LossAndGradient result;
  result.loss = BatchLoss(error, kind);
  result.gradient = Gradient::ZerosLike(net);
  double inv_n = 1.0 / static_cast<double>(inputs.cols());
  Eigen::MatrixXd delta = LossDerivative(error, kind) * inv_n;
  for (size_t l = layers.size(); l-- > 0;) {
    ScaleByDerivative(layers[l].activation, outputs[l + 1], delta);
    result.gradient.weight[l].noalias() = delta * outputs[l].transpose();
    result.gradient.bias[l] = delta.rowwise().sum();
    if (l > 0) delta = layers[l].weight.transpose() * delta;
  }
  return result;
}

double ComputeLoss(const DenseNet& net, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, LossKind kind) {
  if (inputs.cols() == 0) throw DimensionError("empty batch");
  Eigen::MatrixXd error = net.ForwardBatch(inputs) - targets;
  return BatchLoss(error, kind);
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batches_per_epoch < 0) throw ConfigError("batches_per_epoch must be >= 0");
}

AdamOptimizer::AdamOptimizer(const DenseNet& net, const TrainConfig& config)
    : learning_rate_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      epsilon_(config.epsilon),
      m_(Gradient::ZerosLike(net)),
      v_(Gradient::ZerosLike(net)) {}

void AdamOptimizer::Apply(DenseNet& net, const Gradient& gradient) {
  ++step_;
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  double step_size = learning_rate_ * std::sqrt(c2) / c1;
  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = beta1_ * m + (1.0 - beta1_) * grad;
    v = beta2_ * v + (1.0 - beta2_) * grad.cwiseProduct(grad);
    param.array() -= step_size * m.array() / (v.array().sqrt() + epsilon_);
  };
  auto& layers = net.mutable_layers();
  for (size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, gradient.weight[l], m_.weight[l], v_.weight[l]);
    update(layers[l].bias, gradient.bias[l], m_.bias[l], v_.bias[l]);
  }
}

TrainResult Train(DenseNet net, const Dataset& data, const TrainConfig& config) {
  config.Validate();
  TrainResult result;
  if (config.epochs == 0) {
    result.net = std::move(net);
    return result;
  }
  if (data.size() == 0) throw ConfigError("training dataset is empty");
  if (data.inputs.cols() != data.targets.cols()) {
    throw DimensionError("dataset inputs and targets differ in size");
  }
  Rng rng(config.seed);
  AdamOptimizer adam(net, config);
  std::vector<Eigen::Index> order(data.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index n = data.size();
  const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
  Eigen::MatrixXd xb, yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::Index num_batches = config.batches_per_epoch > 0
                                   ? config.batches_per_epoch
                                   : (n + batch - 1) / batch;
    double weighted = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index b = 0; b < num_batches; ++b) {
      Eigen::Index start = (b * batch) % n;
      Eigen::Index count = std::min(batch, n - start);
      xb.resize(data.inputs.rows(), count);
      yb.resize(data.targets.rows(), count);
      for (Eigen::Index k = 0; k < count; ++k) {
        xb.col(k) = data.inputs.col(order[start + k]);
        yb.col(k) = data.targets.col(order[start + k]);
      }
      LossAndGradient lg = ComputeLossAndGradient(net, xb, yb, config.loss);
      if (!std::isfinite(lg.loss) || !std::isfinite(lg.gradient.MaxAbs())) {
        throw TrainingDivergedError(
            epoch + 1, "training diverged at epoch " + std::to_string(epoch + 1));
      }
      adam.Apply(net, lg.gradient);
      weighted += lg.loss * static_cast<double>(count);
      seen += count;
    }
    result.loss_history.push_back(weighted / static_cast<double>(seen));
    if (!net.AllFinite()) {
      throw TrainingDivergedError(
          epoch + 1,
          "parameters became non-finite at epoch " + std::to_string(epoch + 1));
    }
  }
  result.net = std::move(net);
  return result;
}

TrainResult TrainFromSampler(DenseNet net, const BatchSampler& sampler,
                             const TrainConfig& config) {
  config.Validate();
  if (config.batches_per_epoch < 1 && config.epochs > 0) {
    throw ConfigError("sampler training needs batches_per_epoch >= 1");
  }
  TrainResult result;
  AdamOptimizer adam(net, config);
  Eigen::MatrixXd xb, yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (int b = 0; b < config.batches_per_epoch; ++b) {
      sampler(xb, yb);
      LossAndGradient lg = ComputeLossAndGradient(net, xb, yb, config.loss);
      if (!std::isfinite(lg.loss) || !std::isfinite(lg.gradient.MaxAbs())) {
        throw TrainingDivergedError(
            epoch + 1, "training diverged at epoch " + std::to_string(epoch + 1));
      }
      adam.Apply(net, lg.gradient);
      total += lg.loss;
    }
    result.loss_history.push_back(total / config.batches_per_epoch);
  }
  result.net = std::move(net);
  return result;
}

void WriteDenseNet(std::ostream& out, const DenseNet& net) {
  out << "densenet layers=" << net.num_layers()
      << " input_dim=" << net.input_dim() << " output_dim=" << net.output_dim()
      << "\n";
  for (const DenseLayer& layer : net.layers()) {
    out << "layer in=" << layer.weight.cols() << " out=" << layer.weight.rows()
        << " activation=" << ToString(layer.activation) << "\n";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        if (c > 0) out << ' ';
        out << FormatDouble(layer.weight(r, c));
      }
      out << "\n";
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      if (r > 0) out << ' ';
      out << FormatDouble(layer.bias[r]);
    }
    out << "\n";
  }
}

DenseNet ReadDenseNet(std::istream& in) {
  std::string header = ReadNonEmptyLine(in);
  if (header.rfind("densenet", 0) != 0) throw FormatError("not a densenet checkpoint");
  int num_layers = HeaderInt(header, "layers");
  std::vector<DenseLayer> layers;
  for (int l = 0; l < num_layers; ++l) {
    std::string line = ReadNonEmptyLine(in);
    if (line.rfind("layer", 0) != 0) throw FormatError("expected layer header");
    int fan_in = HeaderInt(line, "in");
    int fan_out = HeaderInt(line, "out");
    DenseLayer layer;
    layer.activation = ParseActivation(HeaderWord(line, "activation"));
    layer.weight.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      std::vector<double> row = ParseValues(ReadNonEmptyLine(in));
      if (static_cast<int>(row.size()) != fan_in) throw FormatError("weight row width");
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = row[c];
    }
    std::vector<double> bias = ParseValues(ReadNonEmptyLine(in));
    if (static_cast<int>(bias.size()) != fan_out) throw FormatError("bias width");
    layer.bias = Eigen::Map<Eigen::VectorXd>(bias.data(), fan_out);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

}  // namespace dwil
