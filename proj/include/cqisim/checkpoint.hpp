#ifndef CQISIM_CHECKPOINT_HPP_
#define CQISIM_CHECKPOINT_HPP_

// Text checkpoint of a PredictorNet's weights.
//
//   cqisim-net 1
//   variant lstm|fnn
//   dims <input_window> <fc_units> <lstm_units> <fnn_hidden>
//   learning_rate <lr>
//   tensor <name> <rows> <cols>
//   <rows*cols values, row-major, one row per line>
//   ...
//   end
//
// Optimizer moments are not stored; a loaded net restarts Adam from zero.

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cqisim/neural.hpp"

namespace cqisim::neural {

constexpr int kCheckpointVersion = 1;

template <typename Scalar>
void save_checkpoint(const PredictorNet<Scalar>& net, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  out << "cqisim-net " << kCheckpointVersion << '\n';
  out << "variant " << to_string(net.variant()) << '\n';
  const NetDims& d = net.dims();
  out << "dims " << d.input_window << ' ' << d.fc_units << ' ' << d.lstm_units << ' '
      << d.fnn_hidden << '\n';
  out << "learning_rate " << std::setprecision(17) << net.optimizer().learning_rate << '\n'
      << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  NetParams<Scalar> params = net.params();
  for (const auto& t : params.tensors()) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    const Eigen::Map<const Matrix<Scalar>> m(t.data, t.rows, t.cols);
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        out << (c ? " " : "") << m(r, c);
      }
      out << '\n';
    }
  }
  out << "end\n";
  out.flags(flags);
  out.precision(precision);
}

template <typename Scalar>
PredictorNet<Scalar> load_checkpoint(std::istream& in) {
  auto fail = [](const std::string& what) -> std::runtime_error {
    return std::runtime_error("bad checkpoint: " + what);
  };
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "cqisim-net") throw fail("missing header");
  if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));

  std::string variant_name;
  if (!(in >> word >> variant_name) || word != "variant") throw fail("missing variant");
  Variant variant;
  if (variant_name == "lstm") {
    variant = Variant::kLstm;
  } else if (variant_name == "fnn") {
    variant = Variant::kFnn;
  } else {
    throw fail("unknown variant " + variant_name);
  }
  NetDims dims;
  if (!(in >> word >> dims.input_window >> dims.fc_units >> dims.lstm_units >>
        dims.fnn_hidden) ||
      word != "dims") {
    throw fail("missing dims");
  }
  AdamConfig optimizer;
  if (!(in >> word >> optimizer.learning_rate) || word != "learning_rate") {
    throw fail("missing learning_rate");
  }

  RngStream unused(0, "checkpoint");
  PredictorNet<Scalar> net = PredictorNet<Scalar>::init(variant, dims, unused, optimizer);
  NetParams<Scalar> params = net.params();
  for (const auto& t : params.tensors()) {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "tensor") throw fail("missing tensor");
    if (name != t.name || rows != t.rows || cols != t.cols) {
      throw fail("tensor " + name + " does not match dims");
    }
    Eigen::Map<Matrix<Scalar>> m(t.data, t.rows, t.cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> m(r, c))) throw fail("truncated tensor " + name);
      }
    }
  }
  if (!(in >> word) || word != "end") throw fail("missing end marker");
  net.set_params(std::move(params));
  return net;
}

}  // namespace cqisim::neural

#endif  // CQISIM_CHECKPOINT_HPP_
