#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace uct::ad {

using Mat = Eigen::MatrixXd;

// Reverse-mode tape for the small dense graphs the seq2seq model builds.
// One tape per training example; nodes are handles into the tape.
struct Var {
  int id = -1;
};

class Tape {
 public:
  // Leaf without gradient tracking (inputs, stop-gradients).
  Var constant(Mat v);
  // Leaf with gradient (parameters).
  Var leaf(Mat v);

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var matmul(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double s);
  Var one_minus(Var a);  // 1 - x elementwise
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var transpose(Var a);
  Var concat_rows(Var a, Var b);  // vertical stack of column vectors
  Var concat_cols(Var a, Var b);  // horizontal stack
  Var softmax(Var a);             // over a column vector
  // -log softmax(logits)[target], a 1x1 scalar node.
  Var cross_entropy(Var logits, int target);

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node.
  // loss must be 1x1.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    std::function<void()> back;  // adds into parent grads
  };

  Var push(Mat value, bool needs_grad, std::function<void()> back = nullptr);

  std::vector<Node> nodes_;

  friend struct VarOps;
};

}  // namespace uct::ad
