#ifndef DOTIN_TENSOR_HPP
#define DOTIN_TENSOR_HPP

// Dense row-major matrices of doubles. Vectors are 1 x n rows and scalars
// are 1 x 1; nothing in the library needs rank > 2.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dotin {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  [[nodiscard]] std::size_t size() const { return rows * cols; }
  [[nodiscard]] std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws DimensionError unless values.size() == rows * cols.
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row_vector(std::span<const double> values);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor identity(std::size_t n);

  [[nodiscard]] std::size_t rows() const { return shape_.rows; }
  [[nodiscard]] std::size_t cols() const { return shape_.cols; }
  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] double* data() { return values_.data(); }
  [[nodiscard]] const double* data() const { return values_.data(); }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> row(std::size_t r) {
    return {values_.data() + r * shape_.cols, shape_.cols};
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * shape_.cols, shape_.cols};
  }

  /// Only valid for 1 x 1 tensors.
  [[nodiscard]] double item() const;

  void fill(double v);
  Tensor& operator+=(const Tensor& other);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Plain (non-recording) kernels. The autodiff layer builds on these.

/// Standard matrix product; DimensionError names both shapes on mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T
Tensor matmul_transposed_b(const Tensor& a, const Tensor& b);
/// a^T * b
Tensor matmul_transposed_a(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Softmax of logits / tau restricted to entries where mask is true.
/// Masked entries are exactly zero. Throws EmptySupportError when nothing is
/// unmasked and DomainError for tau <= 0.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   const std::vector<bool>& mask, double tau);
std::vector<double> softmax(std::span<const double> logits, double tau = 1.0);

double elu(double x);

/// -log softmax(logits)[label]; IndexError on an out-of-range label.
double cross_entropy_from_logits(std::span<const double> logits, std::size_t label);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace dotin

#endif  // DOTIN_TENSOR_HPP
