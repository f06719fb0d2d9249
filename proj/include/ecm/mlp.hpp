#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace ecm {

/// Small dense perceptron with tanh between layers (none after the last).
/// Parameters are either all-zero or drawn from a seeded uniform
/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)); there is no training in this library,
/// heads are exercised structurally.
class Mlp {
 public:
  static Mlp zeros(const std::vector<int>& dims);
  static Mlp seeded(const std::vector<int>& dims, uint64_t seed);

  std::vector<double> forward(std::span<const double> input) const;

  int in_dim() const { return static_cast<int>(weights_.front().cols()); }
  int out_dim() const { return static_cast<int>(weights_.back().rows()); }
  int layer_count() const { return static_cast<int>(weights_.size()); }

  // Direct parameter access (tests craft exact layers through these).
  Eigen::MatrixXd& weight(int layer) { return weights_[layer]; }
  Eigen::VectorXd& bias(int layer) { return biases_[layer]; }
  const Eigen::MatrixXd& weight(int layer) const { return weights_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[layer]; }

 private:
  Mlp() = default;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// Numerically stable softmax; entries > 0, sum 1 within 1e-6.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace ecm
