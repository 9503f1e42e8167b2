#ifndef CQISIM_NEURAL_HPP_
#define CQISIM_NEURAL_HPP_

// From-scratch CQI predictors: a per-timestep FC -> LSTM -> sum network and a
// single-hidden-layer feedforward baseline. Both regress the next CQI in the
// normalized space (x - 8) / 7 and are trained with Adam on batched MSE.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cqisim/rng.hpp"
#include "cqisim/types.hpp"

namespace cqisim::neural {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

template <std::floating_point Scalar>
Scalar selu(Scalar x) {
  const auto lambda = static_cast<Scalar>(kSeluLambda);
  const auto alpha = static_cast<Scalar>(kSeluAlpha);
  return x > Scalar(0) ? lambda * x : lambda * alpha * std::expm1(x);
}

template <std::floating_point Scalar>
Scalar selu_grad(Scalar x) {
  const auto lambda = static_cast<Scalar>(kSeluLambda);
  const auto alpha = static_cast<Scalar>(kSeluAlpha);
  return x > Scalar(0) ? lambda : lambda * alpha * std::exp(x);
}

template <typename Derived>
auto selu(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto lambda = static_cast<Scalar>(kSeluLambda);
  const auto la = static_cast<Scalar>(kSeluLambda * kSeluAlpha);
  return (x > Scalar(0)).select(lambda * x, la * (x.exp() - Scalar(1)));
}

template <typename Derived>
auto selu_grad(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto lambda = static_cast<Scalar>(kSeluLambda);
  const auto la = static_cast<Scalar>(kSeluLambda * kSeluAlpha);
  return (x > Scalar(0)).select(Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                                    x.rows(), x.cols(), lambda),
                                la * x.exp());
}

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return x.logistic();
}

inline double normalize_cqi(double cqi) { return (cqi - 8.0) / 7.0; }
inline double denormalize_cqi(double y) { return 8.0 + 7.0 * y; }

/// clamp(round(raw), 1, 15); non-finite input is a logic error.
inline CqiValue quantize_prediction(double raw) {
  if (!std::isfinite(raw)) {
    throw std::invalid_argument("prediction is not finite");
  }
  const double rounded = std::round(raw);
  if (rounded <= kMinCqi) return CqiValue(kMinCqi);
  if (rounded >= kMaxCqi) return CqiValue(kMaxCqi);
  return CqiValue(static_cast<int>(rounded));
}

enum class Activation { kSelu, kIdentity };
enum class Variant { kLstm, kFnn };

inline std::string_view to_string(Variant v) { return v == Variant::kLstm ? "lstm" : "fnn"; }

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError() : std::runtime_error("divergence") {}
};

class InsufficientHistory : public std::invalid_argument {
 public:
  InsufficientHistory() : std::invalid_argument("insufficient history") {}
};

template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weights;  // out x in
  Vector<Scalar> bias;     // out
  Activation activation = Activation::kSelu;

  Eigen::Index inputs() const { return weights.cols(); }
  Eigen::Index outputs() const { return weights.rows(); }

  /// Pre-activation for a batch laid out one sample per column.
  Matrix<Scalar> preactivation(const Matrix<Scalar>& x) const {
    return (weights * x).colwise() + bias;
  }

  Matrix<Scalar> activate(const Matrix<Scalar>& z) const {
    if (activation == Activation::kIdentity) return z;
    return selu(z.array()).matrix();
  }

  /// Accumulates parameter gradients into `grad` and returns dL/dx.
  Matrix<Scalar> backward(const Matrix<Scalar>& x, const Matrix<Scalar>& z,
                          const Matrix<Scalar>& d_out, DenseLayer& grad) const {
    Matrix<Scalar> dz = d_out;
    if (activation == Activation::kSelu) {
      dz.array() *= selu_grad(z.array());
    }
    grad.weights.noalias() += dz * x.transpose();
    grad.bias.noalias() += dz.rowwise().sum();
    return weights.transpose() * dz;
  }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Gate blocks are stacked by rows in the order input, forget, output,
/// candidate; each block is H rows.
template <typename Scalar>
struct LstmLayer {
  Matrix<Scalar> input_weights;      // 4H x in
  Matrix<Scalar> recurrent_weights;  // 4H x H
  Vector<Scalar> bias;               // 4H

  Eigen::Index hidden() const { return recurrent_weights.cols(); }

  friend bool operator==(const LstmLayer&, const LstmLayer&) = default;
};

struct NetDims {
  int input_window = 40;
  int fc_units = 30;
  int lstm_units = 30;
  int fnn_hidden = 64;

  friend bool operator==(const NetDims&, const NetDims&) = default;
};

template <typename Scalar>
struct TensorView {
  std::string_view name;
  Scalar* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Vector<Scalar>> flat() const { return {data, size()}; }
};

/// Learnable parameters of either variant. Also reused to hold gradients and
/// optimizer moments of the same shape.
template <typename Scalar>
struct NetParams {
  Variant variant = Variant::kLstm;
  // LSTM variant
  DenseLayer<Scalar> fc;
  LstmLayer<Scalar> lstm;
  Scalar head_bias = 0;
  // FNN variant
  DenseLayer<Scalar> hidden;
  DenseLayer<Scalar> output;

  /// Column-major storage for every tensor. Row-major serialization is done
  /// by the checkpoint writer.
  std::vector<TensorView<Scalar>> tensors() {
    if (variant == Variant::kLstm) {
      return {
          {"fc.weight", fc.weights.data(), fc.weights.rows(), fc.weights.cols()},
          {"fc.bias", fc.bias.data(), fc.bias.rows(), 1},
          {"lstm.input_weight", lstm.input_weights.data(), lstm.input_weights.rows(),
           lstm.input_weights.cols()},
          {"lstm.recurrent_weight", lstm.recurrent_weights.data(),
           lstm.recurrent_weights.rows(), lstm.recurrent_weights.cols()},
          {"lstm.bias", lstm.bias.data(), lstm.bias.rows(), 1},
          {"head.bias", &head_bias, 1, 1},
      };
    }
    return {
        {"hidden.weight", hidden.weights.data(), hidden.weights.rows(), hidden.weights.cols()},
        {"hidden.bias", hidden.bias.data(), hidden.bias.rows(), 1},
        {"output.weight", output.weights.data(), output.weights.rows(), output.weights.cols()},
        {"output.bias", output.bias.data(), output.bias.rows(), 1},
    };
  }

  NetParams zeros_like() const {
    NetParams z = *this;
    for (auto& t : z.tensors()) t.flat().setZero();
    return z;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& t : const_cast<NetParams*>(this)->tensors()) n += t.size();
    return n;
  }

  bool all_finite() const {
    for (const auto& t : const_cast<NetParams*>(this)->tensors()) {
      if (!t.flat().allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

template <typename Scalar>
struct AdamState {
  NetParams<Scalar> first_moment;
  NetParams<Scalar> second_moment;
  long step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Windows laid out one per column, oldest timestep in row 0.
template <typename Scalar>
struct TrainBatch {
  Matrix<Scalar> inputs;     // N x B, normalized
  RowVector<Scalar> targets;  // 1 x B, normalized

  Eigen::Index size() const { return inputs.cols(); }
};

/// The `batch_size` most recent stride-1 windows of `history` whose targets lie
/// `horizon` steps past the window end. The newest window targets history.back().
template <typename Scalar>
TrainBatch<Scalar> make_sliding_batch(std::span<const int> history, int window,
                                      int batch_size, int horizon) {
  const auto needed = static_cast<std::size_t>(window + batch_size - 1 + horizon);
  if (window < 1 || batch_size < 1 || horizon < 0 || history.size() < needed) {
    throw InsufficientHistory();
  }
  TrainBatch<Scalar> batch;
  batch.inputs.resize(window, batch_size);
  batch.targets.resize(batch_size);
  const std::size_t last = history.size() - 1;
  for (int b = 0; b < batch_size; ++b) {
    // column batch_size-1 is the newest sample
    const std::size_t target = last - static_cast<std::size_t>(batch_size - 1 - b);
    const std::size_t end = target - static_cast<std::size_t>(horizon);
    for (int k = 0; k < window; ++k) {
      const std::size_t idx = end + 1 - static_cast<std::size_t>(window) + static_cast<std::size_t>(k);
      batch.inputs(k, b) = static_cast<Scalar>(normalize_cqi(history[idx]));
    }
    batch.targets(b) = static_cast<Scalar>(normalize_cqi(history[target]));
  }
  return batch;
}

template <typename Scalar>
class PredictorNet {
 public:
  PredictorNet() = default;

  /// LeCun-normal weights (std 1/sqrt(fan_in)), zero biases, forget-gate bias +1.
  static PredictorNet init(Variant variant, const NetDims& dims, RngStream& rng,
                           AdamConfig optimizer = {}) {
    if (dims.input_window < 1 || dims.fc_units < 1 || dims.lstm_units < 1 ||
        dims.fnn_hidden < 1) {
      throw std::invalid_argument("network dimensions must be positive");
    }
    PredictorNet net;
    net.dims_ = dims;
    net.optimizer_ = optimizer;
    NetParams<Scalar>& p = net.params_;
    p.variant = variant;
    if (variant == Variant::kLstm) {
      const int f = dims.fc_units;
      const int h = dims.lstm_units;
      p.fc = {lecun(rng, f, 1), Vector<Scalar>::Zero(f), Activation::kSelu};
      p.lstm.input_weights = lecun(rng, 4 * h, f);
      p.lstm.recurrent_weights = lecun(rng, 4 * h, h);
      p.lstm.bias = Vector<Scalar>::Zero(4 * h);
      p.lstm.bias.segment(h, h).setOnes();
      p.head_bias = 0;
    } else {
      const int n = dims.input_window;
      const int hid = dims.fnn_hidden;
      p.hidden = {lecun(rng, hid, n), Vector<Scalar>::Zero(hid), Activation::kSelu};
      p.output = {lecun(rng, 1, hid), Vector<Scalar>::Zero(1), Activation::kIdentity};
    }
    net.adam_ = {p.zeros_like(), p.zeros_like(), 0};
    return net;
  }

  Variant variant() const { return params_.variant; }
  const NetDims& dims() const { return dims_; }
  const NetParams<Scalar>& params() const { return params_; }
  NetParams<Scalar>& params() { return params_; }
  const AdamConfig& optimizer() const { return optimizer_; }
  void set_learning_rate(double lr) { optimizer_.learning_rate = lr; }
  const AdamState<Scalar>& adam_state() const { return adam_; }

  /// Replaces parameters; optimizer moments restart from zero.
  void set_params(NetParams<Scalar> params) {
    params_ = std::move(params);
    adam_ = {params_.zeros_like(), params_.zeros_like(), 0};
  }

  /// Denormalized prediction from the last N raw CQI values of `window`.
  double forward(std::span<const double> window) const {
    const int n = dims_.input_window;
    if (window.size() < static_cast<std::size_t>(n)) {
      throw InsufficientHistory();
    }
    Matrix<Scalar> x(n, 1);
    const std::size_t offset = window.size() - static_cast<std::size_t>(n);
    for (int k = 0; k < n; ++k) {
      x(k, 0) = static_cast<Scalar>(normalize_cqi(window[offset + static_cast<std::size_t>(k)]));
    }
    return denormalize_cqi(static_cast<double>(forward_normalized(x)(0)));
  }

  double forward(std::span<const int> window) const {
    std::vector<double> values(window.begin(), window.end());
    return forward(std::span<const double>(values));
  }

  /// Normalized outputs, one per column of `inputs`.
  RowVector<Scalar> forward_normalized(const Matrix<Scalar>& inputs) const {
    if (params_.variant == Variant::kLstm) {
      return lstm_forward(inputs, scratch_tape(inputs.cols()));
    }
    Matrix<Scalar> z = params_.hidden.preactivation(inputs);
    Matrix<Scalar> a = params_.hidden.activate(z);
    return params_.output.preactivation(a);
  }

  Scalar loss(const TrainBatch<Scalar>& batch) const {
    const RowVector<Scalar> y = forward_normalized(batch.inputs);
    return (y - batch.targets).squaredNorm() / static_cast<Scalar>(batch.size());
  }

  /// MSE loss with its gradient written into `grad` (same shape as params()).
  Scalar loss_and_gradient(const TrainBatch<Scalar>& batch, NetParams<Scalar>& grad) const {
    grad = params_.zeros_like();
    const auto b = static_cast<Scalar>(batch.size());
    if (params_.variant == Variant::kLstm) {
      LstmTape& tape = scratch_tape(batch.inputs.cols());
      const RowVector<Scalar> y = lstm_forward(batch.inputs, tape);
      const RowVector<Scalar> residual = y - batch.targets;
      lstm_backward(tape, (Scalar(2) / b) * residual, grad);
      return residual.squaredNorm() / b;
    }
    const Matrix<Scalar> z1 = params_.hidden.preactivation(batch.inputs);
    const Matrix<Scalar> a1 = params_.hidden.activate(z1);
    const Matrix<Scalar> y = params_.output.preactivation(a1);
    const Matrix<Scalar> residual = y - batch.targets;
    const Matrix<Scalar> dy = (Scalar(2) / b) * residual;
    const Matrix<Scalar> da1 = params_.output.backward(a1, y, dy, grad.output);
    params_.hidden.backward(batch.inputs, z1, da1, grad.hidden);
    return residual.squaredNorm() / b;
  }

  /// One Adam step on `batch`. Throws DivergenceError, leaving parameters
  /// untouched, when the loss or any gradient is not finite.
  Scalar train_step(const TrainBatch<Scalar>& batch) {
    NetParams<Scalar> grad;
    const Scalar loss_value = loss_and_gradient(batch, grad);
    if (!std::isfinite(loss_value) || !grad.all_finite()) {
      throw DivergenceError();
    }
    apply_adam(grad);
    if (!params_.all_finite()) {
      throw DivergenceError();
    }
    return loss_value;
  }

  friend bool operator==(const PredictorNet&, const PredictorNet&) = default;

 private:
  /// Per-timestep quantities stored as column blocks [t*B, (t+1)*B).
  struct LstmTape {
    RowVector<Scalar> x;   // 1 x NB, inputs in timestep-major order
    Matrix<Scalar> fc_pre;  // F x NB
    Matrix<Scalar> fc_out;  // F x NB
    Matrix<Scalar> gates;   // 4H x NB, post-activation
    Matrix<Scalar> cell;    // H x NB
    Matrix<Scalar> cell_tanh;
    Matrix<Scalar> hidden;  // H x NB
    Matrix<Scalar> pre_gates;  // 4H x NB
    Matrix<Scalar> dz;         // 4H x NB, backward only
    Matrix<Scalar> da;         // F x NB, backward only
  };

  /// Reused across calls so training does not reallocate its buffers. Single
  /// windows keep their own tape so prediction does not shrink the batch one.
  static LstmTape& scratch_tape(Eigen::Index batch) {
    thread_local LstmTape single;
    thread_local LstmTape batched;
    return batch == 1 ? single : batched;
  }

  static Matrix<Scalar> lecun(RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(cols));
    Matrix<Scalar> m(rows, cols);
    // row-major draw order so the layout does not depend on Eigen storage
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = static_cast<Scalar>(rng.normal() * std_dev);
      }
    }
    return m;
  }

  RowVector<Scalar> lstm_forward(const Matrix<Scalar>& inputs, LstmTape& tape) const {
    const auto& p = params_;
    const Eigen::Index steps = inputs.rows();
    const Eigen::Index batch = inputs.cols();
    const Eigen::Index h = p.lstm.hidden();
    const Eigen::Index total = steps * batch;

    // The FC layer and the input half of the gate preactivations do not depend
    // on the recurrence, so they are computed for all timesteps at once.
    tape.x.resize(total);
    for (Eigen::Index t = 0; t < steps; ++t) tape.x.segment(t * batch, batch) = inputs.row(t);
    tape.fc_pre.noalias() = p.fc.weights * tape.x;
    tape.fc_pre.colwise() += p.fc.bias;
    tape.fc_out = selu(tape.fc_pre.array()).matrix();
    Matrix<Scalar>& z = tape.pre_gates;
    z.noalias() = p.lstm.input_weights * tape.fc_out;
    z.colwise() += p.lstm.bias;

    tape.gates.resize(4 * h, total);
    tape.cell.resize(h, total);
    tape.cell_tanh.resize(h, total);
    tape.hidden.resize(h, total);
    for (Eigen::Index t = 0; t < steps; ++t) {
      auto zt = z.middleCols(t * batch, batch);
      if (t > 0) {
        zt.noalias() += p.lstm.recurrent_weights * tape.hidden.middleCols((t - 1) * batch, batch);
      }
      auto g = tape.gates.middleCols(t * batch, batch);
      g.topRows(3 * h) = sigmoid(zt.topRows(3 * h).array()).matrix();
      g.bottomRows(h) = zt.bottomRows(h).array().tanh().matrix();
      auto c = tape.cell.middleCols(t * batch, batch);
      c = g.topRows(h).cwiseProduct(g.bottomRows(h));
      if (t > 0) c += g.middleRows(h, h).cwiseProduct(tape.cell.middleCols((t - 1) * batch, batch));
      auto tc = tape.cell_tanh.middleCols(t * batch, batch);
      tc = c.array().tanh().matrix();
      tape.hidden.middleCols(t * batch, batch) = g.middleRows(2 * h, h).cwiseProduct(tc);
    }
    RowVector<Scalar> y = tape.hidden.rightCols(batch).colwise().sum();
    y.array() += p.head_bias;
    return y;
  }

  /// Backpropagation through time over the full unroll.
  void lstm_backward(LstmTape& tape, const RowVector<Scalar>& dy,
                     NetParams<Scalar>& grad) const {
    const auto& p = params_;
    const Eigen::Index batch = dy.cols();
    const Eigen::Index total = tape.x.cols();
    const Eigen::Index steps = total / batch;
    const Eigen::Index h = p.lstm.hidden();

    grad.head_bias += dy.sum();
    Matrix<Scalar> dh = dy.replicate(h, 1);
    Matrix<Scalar> dc = Matrix<Scalar>::Zero(h, batch);
    Matrix<Scalar>& dz = tape.dz;
    dz.resize(4 * h, total);

    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      const auto g = tape.gates.middleCols(t * batch, batch);
      const auto tc = tape.cell_tanh.middleCols(t * batch, batch).array();
      const auto gi = g.topRows(h).array();
      const auto gf = g.middleRows(h, h).array();
      const auto go = g.middleRows(2 * h, h).array();
      const auto gg = g.bottomRows(h).array();
      auto dzt = dz.middleCols(t * batch, batch);

      dc.array() += dh.array() * go * (Scalar(1) - tc.square());
      dzt.topRows(h).array() = dc.array() * gg * gi * (Scalar(1) - gi);
      if (t > 0) {
        const auto c_prev = tape.cell.middleCols((t - 1) * batch, batch).array();
        dzt.middleRows(h, h).array() = dc.array() * c_prev * gf * (Scalar(1) - gf);
      } else {
        dzt.middleRows(h, h).setZero();
      }
      dzt.middleRows(2 * h, h).array() = dh.array() * tc * go * (Scalar(1) - go);
      dzt.bottomRows(h).array() = dc.array() * gi * (Scalar(1) - gg.square());

      if (t > 0) {
        dh.noalias() = p.lstm.recurrent_weights.transpose() * dzt;
        dc.array() *= gf;
      }
    }

    grad.lstm.input_weights.noalias() += dz * tape.fc_out.transpose();
    grad.lstm.bias.noalias() += dz.rowwise().sum();
    if (steps > 1) {
      grad.lstm.recurrent_weights.noalias() +=
          dz.rightCols(total - batch) * tape.hidden.leftCols(total - batch).transpose();
    }
    tape.da.noalias() = p.lstm.input_weights.transpose() * dz;
    tape.da.array() *= selu_grad(tape.fc_pre.array());
    grad.fc.weights.noalias() += tape.da * tape.x.transpose();
    grad.fc.bias.noalias() += tape.da.rowwise().sum();
  }

  void apply_adam(const NetParams<Scalar>& grad) {
    ++adam_.step;
    const double b1 = optimizer_.beta1;
    const double b2 = optimizer_.beta2;
    const auto bias1 = static_cast<Scalar>(1.0 - std::pow(b1, static_cast<double>(adam_.step)));
    const auto bias2 = static_cast<Scalar>(1.0 - std::pow(b2, static_cast<double>(adam_.step)));
    const auto lr = static_cast<Scalar>(optimizer_.learning_rate);
    const auto eps = static_cast<Scalar>(optimizer_.epsilon);
    auto theta = params_.tensors();
    auto g = const_cast<NetParams<Scalar>&>(grad).tensors();
    auto m = adam_.first_moment.tensors();
    auto v = adam_.second_moment.tensors();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto gi = g[i].flat();
      auto mi = m[i].flat();
      auto vi = v[i].flat();
      auto ti = theta[i].flat();
      mi.array() = static_cast<Scalar>(b1) * mi.array() + static_cast<Scalar>(1.0 - b1) * gi.array();
      vi.array() =
          static_cast<Scalar>(b2) * vi.array() + static_cast<Scalar>(1.0 - b2) * gi.array().square();
      ti.array() -= lr * (mi.array() / bias1) / ((vi.array() / bias2).sqrt() + eps);
    }
  }

  NetDims dims_;
  NetParams<Scalar> params_;
  AdamConfig optimizer_;
  AdamState<Scalar> adam_;
};

/// Central-difference check of the analytic batch gradient. Returns the max
/// over all parameters of |a - n| / max(|a|, |n|, 1e-8).
template <typename Scalar>
double gradient_check(const PredictorNet<Scalar>& net, const TrainBatch<Scalar>& batch,
                      double eps) {
  if (eps < 1e-6 || eps > 1e-3) {
    throw std::invalid_argument("eps must be in [1e-6, 1e-3]");
  }
  NetParams<Scalar> analytic;
  net.loss_and_gradient(batch, analytic);
  PredictorNet<Scalar> probe = net;
  auto theta = probe.params().tensors();
  auto grad = analytic.tensors();
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (Eigen::Index k = 0; k < theta[i].size(); ++k) {
      Scalar& value = theta[i].data[k];
      const Scalar saved = value;
      value = saved + static_cast<Scalar>(eps);
      const double up = static_cast<double>(probe.loss(batch));
      value = saved - static_cast<Scalar>(eps);
      const double down = static_cast<double>(probe.loss(batch));
      value = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = static_cast<double>(grad[i].data[k]);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace cqisim::neural

#endif  // CQISIM_NEURAL_HPP_
