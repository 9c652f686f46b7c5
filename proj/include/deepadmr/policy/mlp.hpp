#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "deepadmr/common/random.hpp"

namespace deepadmr::policy {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Fully connected network with tanh hidden layers and a linear output layer.
///
/// All weights live in one flat vector: per layer, the (out x in) weight block in column-major
/// order followed by the bias. Inputs are column batches (in x B).
class Mlp {
 public:
  struct Tape {
    std::vector<MatrixXd> activations;  // [0] = input, [l] = output of layer l-1 (post-tanh for hidden)
  };

  Mlp() = default;

  explicit Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw std::invalid_argument("Mlp layer sizes must be positive");
      offsets_.push_back(total);
      total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_ = VectorXd::Zero(static_cast<Eigen::Index>(total));
  }

  /// Gaussian fan-in initialization; the last layer is scaled by `output_gain`. Biases start at zero.
  void initialize(Rng& rng, double output_gain) {
    params_.setZero();
    for (std::size_t l = 0; l < layer_count(); ++l) {
      const double gain = l + 1 == layer_count() ? output_gain : 1.0;
      const double scale = gain / std::sqrt(static_cast<double>(in_dim(l)));
      auto w = weight(l);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = scale * standard_normal(rng);
    }
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t layer_count() const { return offsets_.size(); }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t in_dim(std::size_t l) const { return sizes_[l]; }
  std::size_t out_dim(std::size_t l) const { return sizes_[l + 1]; }

  VectorXd& params() { return params_; }
  const VectorXd& params() const { return params_; }
  std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }

  Eigen::Map<MatrixXd> weight(std::size_t l) {
    return {params_.data() + offsets_[l], static_cast<Eigen::Index>(out_dim(l)), static_cast<Eigen::Index>(in_dim(l))};
  }
  Eigen::Map<const MatrixXd> weight(std::size_t l) const {
    return {params_.data() + offsets_[l], static_cast<Eigen::Index>(out_dim(l)), static_cast<Eigen::Index>(in_dim(l))};
  }
  Eigen::Map<VectorXd> bias(std::size_t l) {
    return {params_.data() + offsets_[l] + out_dim(l) * in_dim(l), static_cast<Eigen::Index>(out_dim(l))};
  }
  Eigen::Map<const VectorXd> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + out_dim(l) * in_dim(l), static_cast<Eigen::Index>(out_dim(l))};
  }

  MatrixXd forward(const MatrixXd& x) const {
    Tape tape;
    return forward(x, tape);
  }

  MatrixXd forward(const MatrixXd& x, Tape& tape) const {
    if (static_cast<std::size_t>(x.rows()) != input_dim()) throw std::invalid_argument("Mlp::forward: input size mismatch");
    tape.activations.clear();
    tape.activations.push_back(x);
    for (std::size_t l = 0; l < layer_count(); ++l) {
      MatrixXd z = weight(l) * tape.activations.back();
      z.colwise() += bias(l);
      if (l + 1 < layer_count()) z = z.array().tanh().matrix();
      tape.activations.push_back(std::move(z));
    }
    return tape.activations.back();
  }

  /// Gradient of a scalar loss w.r.t. the flat parameters, given dLoss/dOutput (out x B).
  VectorXd backward(const Tape& tape, const MatrixXd& d_output) const {
    VectorXd grad = VectorXd::Zero(params_.size());
    MatrixXd delta = d_output;
    for (std::size_t l = layer_count(); l-- > 0;) {
      const MatrixXd& input = tape.activations[l];
      Eigen::Map<MatrixXd> d_w(grad.data() + offsets_[l], static_cast<Eigen::Index>(out_dim(l)),
                               static_cast<Eigen::Index>(in_dim(l)));
      Eigen::Map<VectorXd> d_b(grad.data() + offsets_[l] + out_dim(l) * in_dim(l), static_cast<Eigen::Index>(out_dim(l)));
      d_w.noalias() = delta * input.transpose();
      d_b = delta.rowwise().sum();
      if (l > 0) {
        MatrixXd back = weight(l).transpose() * delta;
        delta = (back.array() * (1.0 - input.array().square())).matrix();
      }
    }
    return grad;
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  VectorXd params_;
};

}  // namespace deepadmr::policy
