#include "uct/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace uct::ad {

Var Tape::push(Mat value, bool needs_grad, std::function<void()> back) {
  Node n;
  n.value = std::move(value);
  n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Mat v) { return push(std::move(v), false); }

Var Tape::leaf(Mat v) { return push(std::move(v), true); }

Var Tape::add(Var a, Var b) {
  Mat v = nodes_[a.id].value + nodes_[b.id].value;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, b, out]() {
    nodes_[a.id].grad += nodes_[out].grad;
    nodes_[b.id].grad += nodes_[out].grad;
  });
}

Var Tape::sub(Var a, Var b) {
  Mat v = nodes_[a.id].value - nodes_[b.id].value;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, b, out]() {
    nodes_[a.id].grad += nodes_[out].grad;
    nodes_[b.id].grad -= nodes_[out].grad;
  });
}

Var Tape::matmul(Var a, Var b) {
  Mat v = nodes_[a.id].value * nodes_[b.id].value;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, b, out]() {
    nodes_[a.id].grad += nodes_[out].grad * nodes_[b.id].value.transpose();
    nodes_[b.id].grad += nodes_[a.id].value.transpose() * nodes_[out].grad;
  });
}

Var Tape::hadamard(Var a, Var b) {
  Mat v = nodes_[a.id].value.cwiseProduct(nodes_[b.id].value);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, b, out]() {
    nodes_[a.id].grad +=
        nodes_[out].grad.cwiseProduct(nodes_[b.id].value);
    nodes_[b.id].grad +=
        nodes_[out].grad.cwiseProduct(nodes_[a.id].value);
  });
}

Var Tape::scale(Var a, double s) {
  Mat v = nodes_[a.id].value * s;
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, s, out]() {
    nodes_[a.id].grad += nodes_[out].grad * s;
  });
}

Var Tape::one_minus(Var a) {
  Mat v = (1.0 - nodes_[a.id].value.array()).matrix();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, out]() {
    nodes_[a.id].grad -= nodes_[out].grad;
  });
}

Var Tape::sigmoid(Var a) {
  Mat v = (1.0 / (1.0 + (-nodes_[a.id].value.array()).exp())).matrix();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, out]() {
    const auto& y = nodes_[out].value.array();
    nodes_[a.id].grad +=
        (nodes_[out].grad.array() * y * (1.0 - y)).matrix();
  });
}

Var Tape::tanh(Var a) {
  Mat v = nodes_[a.id].value.array().tanh().matrix();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, out]() {
    const auto& y = nodes_[out].value.array();
    nodes_[a.id].grad += (nodes_[out].grad.array() * (1.0 - y * y)).matrix();
  });
}

Var Tape::transpose(Var a) {
  Mat v = nodes_[a.id].value.transpose();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, out]() {
    nodes_[a.id].grad += nodes_[out].grad.transpose();
  });
}

Var Tape::concat_rows(Var a, Var b) {
  const Mat& va = nodes_[a.id].value;
  const Mat& vb = nodes_[b.id].value;
  if (va.cols() != 1 || vb.cols() != 1)
    throw std::invalid_argument("concat_rows expects column vectors");
  Mat v(va.rows() + vb.rows(), 1);
  v << va, vb;
  const int out = static_cast<int>(nodes_.size());
  const long ra = va.rows(), rb = vb.rows();
  return push(std::move(v), true, [this, a, b, out, ra, rb]() {
    nodes_[a.id].grad += nodes_[out].grad.topRows(ra);
    nodes_[b.id].grad += nodes_[out].grad.bottomRows(rb);
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Mat& va = nodes_[a.id].value;
  const Mat& vb = nodes_[b.id].value;
  if (va.rows() != vb.rows())
    throw std::invalid_argument("concat_cols: row mismatch");
  Mat v(va.rows(), va.cols() + vb.cols());
  v << va, vb;
  const int out = static_cast<int>(nodes_.size());
  const long ca = va.cols(), cb = vb.cols();
  return push(std::move(v), true, [this, a, b, out, ca, cb]() {
    nodes_[a.id].grad += nodes_[out].grad.leftCols(ca);
    nodes_[b.id].grad += nodes_[out].grad.rightCols(cb);
  });
}

Var Tape::softmax(Var a) {
  const Mat& x = nodes_[a.id].value;
  if (x.cols() != 1) throw std::invalid_argument("softmax expects a column");
  const double m = x.maxCoeff();
  Mat e = (x.array() - m).exp().matrix();
  Mat v = e / e.sum();
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, a, out]() {
    // dL/dx = y .* (g - (g . y))
    const Mat& y = nodes_[out].value;
    const Mat& g = nodes_[out].grad;
    const double dot = (g.array() * y.array()).sum();
    nodes_[a.id].grad += (y.array() * (g.array() - dot)).matrix();
  });
}

Var Tape::cross_entropy(Var logits, int target) {
  const Mat& x = nodes_[logits.id].value;
  if (x.cols() != 1 || target < 0 || target >= x.rows())
    throw std::invalid_argument("cross_entropy: bad target");
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  Mat v(1, 1);
  v(0, 0) = lse - x(target, 0);
  const int out = static_cast<int>(nodes_.size());
  return push(std::move(v), true, [this, logits, target, out]() {
    const Mat& x2 = nodes_[logits.id].value;
    const double m2 = x2.maxCoeff();
    Mat soft = (x2.array() - m2).exp().matrix();
    soft /= soft.sum();
    soft(target, 0) -= 1.0;
    nodes_[logits.id].grad += soft * nodes_[out].grad(0, 0);
  });
}

void Tape::backward(Var loss) {
  if (nodes_[loss.id].value.size() != 1)
    throw std::invalid_argument("backward expects a scalar loss");
  for (auto& n : nodes_) n.grad.setZero();
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back();
}

}  // namespace uct::ad
