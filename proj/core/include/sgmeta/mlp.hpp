#pragma once

#include "sgmeta/dynamics.hpp"
#include "sgmeta/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace sgmeta {

// Input normalization applied in front of the network.
struct InputScaling {
  double position = 10.0;
  double heading = kPi;
  double control = 2.0;
  bool operator==(const InputScaling&) const = default;
};

using NetInput = Eigen::Matrix<double, 7, 1>;
using InputJacobian = Eigen::Matrix<double, 2, 7>;

// Weights and biases of the 7-50-50-2 best-response network b(x, u^L; w).
// Hidden layers are rectified; the output layer is tanh so predictions stay
// inside (-1, 1)^2.
struct MlpParams {
  static constexpr std::array<int, 4> kArch{7, 50, 50, 2};
  static constexpr int kLayers = 3;

  std::array<Eigen::MatrixXd, kLayers> weights;  // weights[l] is out x in
  std::array<Eigen::VectorXd, kLayers> biases;
  InputScaling scaling;

  static MlpParams zeros(const InputScaling& scaling = {});
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static MlpParams initialize(Rng& rng, const InputScaling& scaling = {});

  static constexpr std::size_t parameter_count() {
    std::size_t n = 0;
    for (int l = 0; l < kLayers; ++l) n += static_cast<std::size_t>(kArch[l] + 1) * kArch[l + 1];
    return n;
  }
  bool has_valid_shapes() const;
  bool all_finite() const;

  // Layer-major, weights (column-major) then biases for each layer.
  Eigen::VectorXd flatten() const;
  static MlpParams unflatten(const Eigen::VectorXd& flat, const InputScaling& scaling = {});

  MlpParams& axpy(double a, const MlpParams& x);  // this += a * x
  MlpParams& operator*=(double s);
  bool operator==(const MlpParams& o) const;
};

struct BrSample {
  JointState state;
  LeaderControl leader_control;
  FollowerControl response;
};

using Dataset = std::vector<BrSample>;

NetInput encode_input(const JointState& x, const LeaderControl& uL, const InputScaling& s);

// Raw network output on an encoded input. Parameters are assumed finite.
Eigen::Vector2d evaluate(const MlpParams& w, const NetInput& input);

// b(x, u^L; w). Throws std::invalid_argument on non-finite parameters.
FollowerControl forward(const MlpParams& w, const JointState& x, const LeaderControl& uL);

// Output and 2x7 Jacobian with respect to the raw (x, u^L) input, ordered
// [pLx, pLy, pFx, pFy, phi, uLx, uLy]. Parameters are assumed finite.
struct ForwardJacobian {
  Eigen::Vector2d output;
  InputJacobian jacobian;
};
ForwardJacobian forward_with_jacobian(const MlpParams& w, const JointState& x,
                                      const LeaderControl& uL);
InputJacobian input_grad(const MlpParams& w, const JointState& x, const LeaderControl& uL);

// Mean squared residual over the dataset. Throws on empty data.
double task_loss(const MlpParams& w, const Dataset& data);

// Exact gradient of task_loss with respect to w.
MlpParams loss_grad(const MlpParams& w, const Dataset& data);

// Loss and gradient from one forward/backward pass.
struct LossAndGrad {
  double loss = 0.0;
  MlpParams grad;
};
LossAndGrad loss_and_grad(const MlpParams& w, const Dataset& data);

// w - step * grad.
MlpParams sgd_step(const MlpParams& w, const MlpParams& grad, double step);

}  // namespace sgmeta
