#include "bivicap/matrix.hpp"

#include <cmath>

namespace bivicap {

namespace {

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
}

}  // namespace

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + a.shape_str() + " incompatible with " +
                     b.shape_str());
  Matrix out(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    double* orow = out.data() + static_cast<std::size_t>(i) * m;
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape("add", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape("sub", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape("hadamard", a, b);
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

void add_in_place(Matrix& a, const Matrix& b) {
  require_same_shape("add_in_place", a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

void axpy_in_place(Matrix& a, double s, const Matrix& b) {
  require_same_shape("axpy_in_place", a, b);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

Matrix sigmoid(const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    // Split on sign so exp never overflows.
    out[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                      : std::exp(x) / (1.0 + std::exp(x));
  }
  return out;
}

Matrix tanh_mat(const Matrix& a) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return out;
}

Matrix elementwise(Elementwise op, const Matrix& a, const Matrix& b) {
  switch (op) {
    case Elementwise::add: return add(a, b);
    case Elementwise::sub: return sub(a, b);
    case Elementwise::hadamard: return hadamard(a, b);
  }
  throw std::invalid_argument("elementwise: unknown op");
}

Matrix activate(Activation kind, const Matrix& a) {
  return kind == Activation::sigmoid ? sigmoid(a) : tanh_mat(a);
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("softmax: empty input");
  double mx = x[0];
  for (double v : x) mx = std::max(mx, v);
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> log_softmax(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("log_softmax: empty input");
  double mx = x[0];
  for (double v : x) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lse;
  return out;
}

void gemv_acc(Matrix& y, const Matrix& w, const Matrix& x) {
  if (w.cols() != x.rows() || x.cols() != 1 || y.rows() != w.rows() || y.cols() != 1)
    throw ShapeError("gemv_acc: y " + y.shape_str() + ", W " + w.shape_str() +
                     ", x " + x.shape_str());
  const int n = w.rows(), k = w.cols();
  for (int i = 0; i < n; ++i) {
    const double* wrow = w.data() + static_cast<std::size_t>(i) * k;
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += wrow[j] * x[j];
    y[i] += acc;
  }
}

void gemv_t_acc(Matrix& y, const Matrix& w, const Matrix& x) {
  if (w.rows() != x.rows() || x.cols() != 1 || y.rows() != w.cols() || y.cols() != 1)
    throw ShapeError("gemv_t_acc: y " + y.shape_str() + ", W " + w.shape_str() +
                     ", x " + x.shape_str());
  const int n = w.rows(), k = w.cols();
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wrow = w.data() + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < k; ++j) y[j] += wrow[j] * xi;
  }
}

void outer_acc(Matrix& g, const Matrix& u, const Matrix& v) {
  if (g.rows() != u.rows() || g.cols() != v.rows() || u.cols() != 1 || v.cols() != 1)
    throw ShapeError("outer_acc: G " + g.shape_str() + ", u " + u.shape_str() +
                     ", v " + v.shape_str());
  const int n = u.rows(), m = v.rows();
  for (int i = 0; i < n; ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    double* grow = g.data() + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) grow[j] += ui * v[j];
  }
}

}  // namespace bivicap
