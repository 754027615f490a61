#include "legalnlp/tensor.hpp"

#include <sstream>
#include <unordered_map>

namespace legalnlp {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->data.size(), 0.0);
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_str(node_->shape));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->data.size(); }

std::span<const double> Tensor::data() const { return node_->data; }
std::span<double> Tensor::mutable_data() { return node_->data; }

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const Shape& s = shape();
  if (index.size() != s.size()) {
    throw DimensionError("index rank mismatch for " + shape_str(s));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= s[axis]) throw DimensionError("index out of range for " + shape_str(s));
    flat = flat * s[axis] + i;
    ++axis;
  }
  return node_->data[flat];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::has_grad() const { return !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }
std::span<double> Tensor::mutable_grad() { return node_->grad; }

void Tensor::zero_grad() {
  if (node_->requires_grad) node_->grad.assign(node_->data.size(), 0.0);
}

Tensor Tensor::detach() const { return from(shape(), node_->data, false); }

const char* Tensor::op_name() const { return node_->op; }

Tensor Tensor::make_result(Shape shape, std::vector<double> values, const char* op,
                           std::vector<Tensor> inputs,
                           std::function<void(detail::Node&)> backward_fn) {
  Tensor out = from(std::move(shape), std::move(values), false);
  bool needs_grad = false;
  for (const Tensor& t : inputs) needs_grad = needs_grad || t.requires_grad();
  out.node_->op = op;
  if (needs_grad) {
    out.node_->requires_grad = true;
    out.node_->inputs.reserve(inputs.size());
    for (Tensor& t : inputs) {
      if (t.node_->consumed) {
        throw GraphError(std::string("op '") + op +
                         "' uses a tensor from an already-backpropagated graph");
      }
      out.node_->inputs.push_back(std::move(t.node_));
    }
    out.node_->backward = std::move(backward_fn);
  }
  return out;
}

ComputeGraph ComputeGraph::trace(const Tensor& root) {
  ComputeGraph graph;
  std::unordered_map<const detail::Node*, std::size_t> index;
  // Iterative post-order DFS; the frame holds the next input to expand.
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.node_.get(), 0);
  std::unordered_map<const detail::Node*, bool> on_stack{{root.node_.get(), true}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next].get();
      ++next;
      if (!index.contains(child) && !on_stack[child]) {
        on_stack[child] = true;
        stack.emplace_back(child, 0);
      }
      continue;
    }
    Entry entry{node->op, {}, node->requires_grad};
    for (const auto& in : node->inputs) entry.inputs.push_back(index.at(in.get()));
    index.emplace(node, graph.entries_.size());
    graph.entries_.push_back(std::move(entry));
    stack.pop_back();
  }
  // Recover owning pointers in topological order.
  graph.nodes_.resize(graph.entries_.size());
  graph.nodes_[index.at(root.node_.get())] = root.node_;
  for (std::size_t k = graph.entries_.size(); k-- > 0;) {
    const auto& node = graph.nodes_[k];
    for (std::size_t j = 0; j < node->inputs.size(); ++j) {
      graph.nodes_[graph.entries_[k].inputs[j]] = node->inputs[j];
    }
  }
  return graph;
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw GraphError("backward on undefined tensor");
  if (loss.numel() != 1) {
    throw GraphError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  if (loss.node()->consumed) {
    throw GraphError("backward called twice on the same graph");
  }
  ComputeGraph graph = ComputeGraph::trace(loss);
  for (auto& node : graph.nodes_) {
    if (node->requires_grad && node->grad.empty()) {
      node->grad.assign(node->data.size(), 0.0);
    }
  }
  auto& root = graph.nodes_.back();
  root->grad[0] += 1.0;
  for (std::size_t k = graph.nodes_.size(); k-- > 0;) {
    auto& node = graph.nodes_[k];
    if (node->backward) node->backward(*node);
  }
  for (auto& node : graph.nodes_) {
    if (!node->backward) continue;
    node->backward = nullptr;
    node->consumed = true;
  }
}

}  // namespace legalnlp
