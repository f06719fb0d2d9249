#include "ecm/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "ecm/rng.hpp"

namespace ecm {

Mlp Mlp::zeros(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("mlp: need at least one layer");
  Mlp m;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    m.weights_.push_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
    m.biases_.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
  }
  return m;
}

Mlp Mlp::seeded(const std::vector<int>& dims, uint64_t seed) {
  Mlp m = zeros(dims);
  std::mt19937_64 eng(splitmix64(seed));
  for (size_t l = 0; l < m.weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.weights_[l].cols()));
    for (Eigen::Index r = 0; r < m.weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weights_[l].cols(); ++c) {
        m.weights_[l](r, c) = uniform(eng, -bound, bound);
      }
    }
    for (Eigen::Index r = 0; r < m.biases_[l].size(); ++r) {
      m.biases_[l](r) = uniform(eng, -bound, bound);
    }
  }
  return m;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != in_dim()) {
    throw std::invalid_argument("mlp: input dimension mismatch");
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(input.data(), input.size());
  for (size_t l = 0; l < weights_.size(); ++l) {
    v = weights_[l] * v + biases_[l];
    if (l + 1 < weights_.size()) v = v.array().tanh().matrix();
  }
  return {v.data(), v.data() + v.size()};
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace ecm
