#include "sgmeta/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sgmeta {

namespace {

using Mat = Eigen::MatrixXd;

struct Batch {
  Eigen::Matrix<double, 7, Eigen::Dynamic> inputs;
  Eigen::Matrix<double, 2, Eigen::Dynamic> targets;
};

Batch make_batch(const Dataset& data, const InputScaling& s) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  Batch b;
  const auto n = static_cast<Eigen::Index>(data.size());
  b.inputs.resize(7, n);
  b.targets.resize(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& d = data[static_cast<std::size_t>(i)];
    b.inputs.col(i) = encode_input(d.state, d.leader_control, s);
    b.targets.col(i) << d.response.speed, d.response.turn_rate;
  }
  return b;
}

void require_finite(const MlpParams& w) {
  if (!w.has_valid_shapes()) throw std::invalid_argument("network parameters have the wrong shape");
  if (!w.all_finite()) throw std::invalid_argument("network parameters are not finite");
}

Eigen::Matrix<double, 7, 1> input_scale_vector(const InputScaling& s) {
  Eigen::Matrix<double, 7, 1> v;
  v << 1.0 / s.position, 1.0 / s.position, 1.0 / s.position, 1.0 / s.position, 1.0 / s.heading,
      1.0 / s.control, 1.0 / s.control;
  return v;
}

}  // namespace

MlpParams MlpParams::zeros(const InputScaling& scaling) {
  MlpParams p;
  for (int l = 0; l < kLayers; ++l) {
    p.weights[l] = Mat::Zero(kArch[l + 1], kArch[l]);
    p.biases[l] = Eigen::VectorXd::Zero(kArch[l + 1]);
  }
  p.scaling = scaling;
  return p;
}

MlpParams MlpParams::initialize(Rng& rng, const InputScaling& scaling) {
  MlpParams p = zeros(scaling);
  for (int l = 0; l < kLayers; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(kArch[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index j = 0; j < p.weights[l].cols(); ++j) {
      for (Eigen::Index i = 0; i < p.weights[l].rows(); ++i) p.weights[l](i, j) = u(rng);
    }
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l](i) = u(rng);
  }
  return p;
}

bool MlpParams::has_valid_shapes() const {
  for (int l = 0; l < kLayers; ++l) {
    if (weights[l].rows() != kArch[l + 1] || weights[l].cols() != kArch[l]) return false;
    if (biases[l].size() != kArch[l + 1]) return false;
  }
  return true;
}

bool MlpParams::all_finite() const {
  for (int l = 0; l < kLayers; ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Eigen::VectorXd MlpParams::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  Eigen::Index k = 0;
  for (int l = 0; l < kLayers; ++l) {
    flat.segment(k, weights[l].size()) = weights[l].reshaped();
    k += weights[l].size();
    flat.segment(k, biases[l].size()) = biases[l];
    k += biases[l].size();
  }
  return flat;
}

MlpParams MlpParams::unflatten(const Eigen::VectorXd& flat, const InputScaling& scaling) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("flat parameter vector has the wrong length");
  }
  MlpParams p = zeros(scaling);
  Eigen::Index k = 0;
  for (int l = 0; l < kLayers; ++l) {
    p.weights[l].reshaped() = flat.segment(k, p.weights[l].size());
    k += p.weights[l].size();
    p.biases[l] = flat.segment(k, p.biases[l].size());
    k += p.biases[l].size();
  }
  return p;
}

MlpParams& MlpParams::axpy(double a, const MlpParams& x) {
  for (int l = 0; l < kLayers; ++l) {
    weights[l] += a * x.weights[l];
    biases[l] += a * x.biases[l];
  }
  return *this;
}

MlpParams& MlpParams::operator*=(double s) {
  for (int l = 0; l < kLayers; ++l) {
    weights[l] *= s;
    biases[l] *= s;
  }
  return *this;
}

bool MlpParams::operator==(const MlpParams& o) const {
  if (!(scaling == o.scaling)) return false;
  for (int l = 0; l < kLayers; ++l) {
    if (weights[l].rows() != o.weights[l].rows() || weights[l].cols() != o.weights[l].cols() ||
        biases[l].size() != o.biases[l].size()) {
      return false;
    }
    if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
  }
  return true;
}

NetInput encode_input(const JointState& x, const LeaderControl& uL, const InputScaling& s) {
  NetInput in;
  in << x.leader_pos / s.position, x.follower_pos / s.position, x.follower_heading / s.heading,
      uL.velocity / s.control;
  return in;
}

namespace {

struct Activations {
  Eigen::VectorXd z1, z2;
  Eigen::Vector2d y;
};

Activations run_layers(const MlpParams& w, const NetInput& in) {
  Activations a;
  a.z1 = w.weights[0] * in + w.biases[0];
  a.z2 = w.weights[1] * a.z1.cwiseMax(0.0) + w.biases[1];
  a.y = (w.weights[2] * a.z2.cwiseMax(0.0) + w.biases[2]).array().tanh();
  return a;
}

}  // namespace

Eigen::Vector2d evaluate(const MlpParams& w, const NetInput& input) { return run_layers(w, input).y; }

FollowerControl forward(const MlpParams& w, const JointState& x, const LeaderControl& uL) {
  require_finite(w);
  const Eigen::Vector2d y = evaluate(w, encode_input(x, uL, w.scaling));
  return {y(0), y(1)};
}

ForwardJacobian forward_with_jacobian(const MlpParams& w, const JointState& x,
                                      const LeaderControl& uL) {
  const Activations act = run_layers(w, encode_input(x, uL, w.scaling));
  const Eigen::VectorXd& z1 = act.z1;
  const Eigen::VectorXd& z2 = act.z2;
  const Eigen::Vector2d& y = act.y;

  // Back-propagate the 2-row output sensitivity through each layer.
  Eigen::Matrix<double, 2, Eigen::Dynamic> d = (1.0 - y.array().square()).matrix().asDiagonal() * w.weights[2];
  d = d * (z2.array() > 0.0).cast<double>().matrix().asDiagonal();
  d = (d * w.weights[1]).eval();
  d = d * (z1.array() > 0.0).cast<double>().matrix().asDiagonal();
  InputJacobian jac = d * w.weights[0];
  jac = jac * input_scale_vector(w.scaling).asDiagonal();
  return {y, jac};
}

InputJacobian input_grad(const MlpParams& w, const JointState& x, const LeaderControl& uL) {
  return forward_with_jacobian(w, x, uL).jacobian;
}

double task_loss(const MlpParams& w, const Dataset& data) {
  const Batch b = make_batch(data, w.scaling);
  require_finite(w);
  const Mat a1 = ((w.weights[0] * b.inputs).colwise() + w.biases[0]).cwiseMax(0.0);
  const Mat a2 = ((w.weights[1] * a1).colwise() + w.biases[1]).cwiseMax(0.0);
  const Mat y = ((w.weights[2] * a2).colwise() + w.biases[2]).array().tanh().matrix();
  return (y - b.targets).squaredNorm() / static_cast<double>(data.size());
}

LossAndGrad loss_and_grad(const MlpParams& w, const Dataset& data) {
  const Batch b = make_batch(data, w.scaling);
  require_finite(w);
  const double n = static_cast<double>(data.size());

  const Mat z1 = (w.weights[0] * b.inputs).colwise() + w.biases[0];
  const Mat a1 = z1.cwiseMax(0.0);
  const Mat z2 = (w.weights[1] * a1).colwise() + w.biases[1];
  const Mat a2 = z2.cwiseMax(0.0);
  const Mat y = ((w.weights[2] * a2).colwise() + w.biases[2]).array().tanh().matrix();
  const Mat resid = y - b.targets;

  LossAndGrad out;
  out.loss = resid.squaredNorm() / n;
  out.grad = MlpParams::zeros(w.scaling);

  const Mat dz3 = ((2.0 / n) * resid.array() * (1.0 - y.array().square())).matrix();
  out.grad.weights[2] = dz3 * a2.transpose();
  out.grad.biases[2] = dz3.rowwise().sum();
  const Mat dz2 = ((w.weights[2].transpose() * dz3).array() * (z2.array() > 0.0).cast<double>()).matrix();
  out.grad.weights[1] = dz2 * a1.transpose();
  out.grad.biases[1] = dz2.rowwise().sum();
  const Mat dz1 = ((w.weights[1].transpose() * dz2).array() * (z1.array() > 0.0).cast<double>()).matrix();
  out.grad.weights[0] = dz1 * b.inputs.transpose();
  out.grad.biases[0] = dz1.rowwise().sum();
  return out;
}

MlpParams loss_grad(const MlpParams& w, const Dataset& data) { return loss_and_grad(w, data).grad; }

MlpParams sgd_step(const MlpParams& w, const MlpParams& grad, double step) {
  MlpParams out = w;
  out.axpy(-step, grad);
  return out;
}

}  // namespace sgmeta
