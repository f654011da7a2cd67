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

#ifndef DWIL_DENSENET_H_
#define DWIL_DENSENET_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace dwil {

enum class Activation { kTanh, kRelu, kIdentity };
std::string_view ToString(Activation activation);
Activation ParseActivation(std::string_view text);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;
};

// Feed-forward network. Batched calls take one sample per column.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // Layer widths sizes[0] -> sizes[1] -> ...; parameters uniform in
  // +-1/sqrt(fan_in).
  DenseNet(const std::vector<int>& sizes,
           const std::vector<Activation>& activations, uint64_t seed);

  // num_layers affine layers: in -> hidden x (num_layers - 1) -> out.
  static DenseNet Mlp(int input_dim, int hidden, int output_dim, int num_layers,
                      Activation hidden_activation,
                      Activation output_activation, uint64_t seed);

  int input_dim() const;
  int output_dim() const;
  size_t num_layers() const { return layers_.size(); }
  size_t ParameterCount() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  Eigen::VectorXd Forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd ForwardBatch(const Eigen::MatrixXd& inputs) const;

  bool AllFinite() const;
  // Throws DimensionError if adjacent layers do not chain.
  void Validate() const;

  bool operator==(const DenseNet& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Parameter-shaped container for gradients and optimizer moments.
struct Gradient {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static Gradient ZerosLike(const DenseNet& net);
  double MaxAbs() const;
};

enum class LossKind { kSmoothL1, kMse };
std::string_view ToString(LossKind kind);
LossKind ParseLossKind(std::string_view text);

// Per-sample loss summed over output coordinates. Smooth-L1 switches from
// quadratic to linear at |e| = 1; mse is the plain squared error.
double SampleLoss(const Eigen::VectorXd& prediction,
                  const Eigen::VectorXd& target, LossKind kind);

struct LossAndGradient {
  double loss = 0.0;
  Gradient gradient;
};

// Mean loss over the batch and its gradient with respect to all parameters.
LossAndGradient ComputeLossAndGradient(const DenseNet& net,
                                       const Eigen::MatrixXd& inputs,
                                       const Eigen::MatrixXd& targets,
                                       LossKind kind);
double ComputeLoss(const DenseNet& net, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, LossKind kind);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 256;
  int epochs = 100;
  LossKind loss = LossKind::kSmoothL1;
  uint64_t seed = 0;
  // Adam decay constants
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // 0: one pass over the data per epoch; otherwise a fixed number of
  // minibatches per epoch
  int batches_per_epoch = 0;

  void Validate() const;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const DenseNet& net, const TrainConfig& config);
  void Apply(DenseNet& net, const Gradient& gradient);

 private:
  double learning_rate_, beta1_, beta2_, epsilon_;
  long long step_ = 0;
  Gradient m_, v_;
};

struct Dataset {
  Eigen::MatrixXd inputs;   // input_dim x n
  Eigen::MatrixXd targets;  // output_dim x n
  Eigen::Index size() const { return inputs.cols(); }
};

struct TrainResult {
  DenseNet net;
  std::vector<double> loss_history;  // mean loss per epoch
};

// Minibatch Adam with a seeded permutation each epoch. Throws
// TrainingDivergedError when the loss becomes non-finite.
TrainResult Train(DenseNet net, const Dataset& data, const TrainConfig& config);

// Fills `inputs`/`targets` with the next batch (columns).
using BatchSampler =
    std::function<void(Eigen::MatrixXd& inputs, Eigen::MatrixXd& targets)>;

// Adam over batches drawn from `sampler`; config.batches_per_epoch batches
// make one epoch.
TrainResult TrainFromSampler(DenseNet net, const BatchSampler& sampler,
                             const TrainConfig& config);

// ----- checkpoints ----- //
//
//   densenet layers=<L> input_dim=<n> output_dim=<m>
//   layer in=<i> out=<o> activation=<name>
//   <o lines of i weights, row-major>
//   <one line of o biases>

void WriteDenseNet(std::ostream& out, const DenseNet& net);
DenseNet ReadDenseNet(std::istream& in);

}  // namespace dwil

#endif  // DWIL_DENSENET_H_
