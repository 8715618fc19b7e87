#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bivicap {

/// Thrown when operand shapes do not agree. The message names both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of 64-bit reals. Column vectors are n×1 matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(check_dims(rows, cols), 0.0) {}
  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != check_dims(rows, cols))
      throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                       " does not match " + shape_str());
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
  /// Row-major literal, e.g. Matrix::of(2, 2, {1, 2, 3, 4}).
  static Matrix of(int rows, int cols, std::initializer_list<double> v) {
    return Matrix(rows, cols, std::vector<double>(v));
  }
  static Matrix column(std::span<const double> v) {
    return Matrix(static_cast<int>(v.size()), 1,
                  std::vector<double>(v.begin(), v.end()));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[idx(r, c)]; }
  double operator()(int r, int c) const { return data_[idx(r, c)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> row(int r) { return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const { return {data_.data() + idx(r, 0), static_cast<std::size_t>(cols_)}; }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  void fill(double v) { data_.assign(data_.size(), v); }
  bool all_finite() const;

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }
  static std::size_t check_dims(int rows, int cols) {
    if (rows < 0 || cols < 0)
      throw ShapeError("Matrix: negative dimension " + std::to_string(rows) +
                       "x" + std::to_string(cols));
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

/// a += b
void add_in_place(Matrix& a, const Matrix& b);
/// a += s*b
void axpy_in_place(Matrix& a, double s, const Matrix& b);

Matrix sigmoid(const Matrix& a);
Matrix tanh_mat(const Matrix& a);

enum class Elementwise { add, sub, hadamard };
Matrix elementwise(Elementwise op, const Matrix& a, const Matrix& b);
enum class Activation { sigmoid, tanh };
Matrix activate(Activation kind, const Matrix& a);

/// Numerically stable softmax (max-subtraction). Throws on empty input.
std::vector<double> softmax(std::span<const double> x);
std::vector<double> log_softmax(std::span<const double> x);

// Vector kernels used by the recurrent cells; vectors are n×1 matrices.
// y += W x
void gemv_acc(Matrix& y, const Matrix& w, const Matrix& x);
// y += Wᵀ x
void gemv_t_acc(Matrix& y, const Matrix& w, const Matrix& x);
// G += u vᵀ
void outer_acc(Matrix& g, const Matrix& u, const Matrix& v);

}  // namespace bivicap
