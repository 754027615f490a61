#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace legalnlp {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Raised when operand shapes do not satisfy an op's contract.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on misuse of the autodiff graph (non-scalar loss, reused graph).
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  // Empty unless requires_grad; allocated for leaves at creation and for
  // interior nodes when backward runs.
  std::vector<double> grad;
  bool requires_grad = false;
  bool consumed = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the grads of its inputs.
  std::function<void(Node&)> backward;
};

}  // namespace detail

// Dense row-major float64 tensor with reverse-mode autodiff.
//
// A Tensor is a shared handle: copies alias the same storage. Ops record a
// node in the graph only when at least one input requires a gradient.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;

  std::span<const double> data() const;
  // Writable view for optimizers and initializers. Mutating values that an
  // unconsumed graph still depends on invalidates its gradients.
  std::span<double> mutable_data();

  double item() const;
  double at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // New leaf holding a copy of the values, outside any graph.
  Tensor detach() const;

  const char* op_name() const;
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  // Op authoring hook: creates a result node linked to `inputs` when any of
  // them requires grad, else a plain constant.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            const char* op, std::vector<Tensor> inputs,
                            std::function<void(detail::Node&)> backward);

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend class ComputeGraph;
};

// Topologically ordered view of the nodes reachable from a root.
class ComputeGraph {
 public:
  struct Entry {
    const char* op;
    std::vector<std::size_t> inputs;  // indices into entries()
    bool requires_grad;
  };

  static ComputeGraph trace(const Tensor& root);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
  std::vector<std::shared_ptr<detail::Node>> nodes_;

  friend void backward(const Tensor& loss);
};

// Accumulates d(loss)/d(leaf) into every requires_grad leaf reachable from
// `loss`. The graph is consumed: a second call on it raises GraphError.
// A loss that does not require grad is a constant and leaves grads untouched.
void backward(const Tensor& loss);

}  // namespace legalnlp
