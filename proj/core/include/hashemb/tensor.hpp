#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hashemb {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float64 array with an optional gradient slot.
///
/// Tensor is a shared handle: copies alias the same storage. Operations in
/// nn.hpp record a backward closure on their result when any input requires
/// a gradient; backward() on a scalar result then accumulates d(result)/d(x)
/// into the grad of every reachable tensor with requires_grad set.
/// A graph is single-threaded; independent graphs may live on separate
/// threads as long as they share no requires_grad leaves being written.
class Tensor {
 public:
  struct Node;
  /// Accumulates the gradient of `self` into its parents.
  using BackwardFn = std::function<void(Node& self)>;

  struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulated
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward;

    /// Grad buffer, zero-filled on first use.
    std::vector<double>& grad_buffer();
  };

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  /// Builds an op result. Records `backward` and the parents only when some
  /// parent requires a gradient.
  static Tensor make_result(Shape shape, std::vector<double> values,
                            std::initializer_list<const Tensor*> parents, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }

  std::span<double> data() { return node_->data; }
  std::span<const double> data() const { return node_->data; }
  double operator[](std::size_t i) const { return node_->data[i]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }

  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient view; zero-filled if nothing has been accumulated yet.
  std::span<double> grad() { return node_->grad_buffer(); }
  std::span<const double> grad() const { return node_->grad_buffer(); }
  void zero_grad();

  /// Reverse-mode pass from this scalar. Throws contract_error if the
  /// tensor holds more than one element.
  void backward();

  /// Detached deep copy of the data (no gradient, no graph).
  Tensor clone(bool requires_grad = false) const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

}  // namespace hashemb
