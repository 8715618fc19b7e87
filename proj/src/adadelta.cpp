#include "bivicap/adadelta.hpp"

#include <cmath>
#include <vector>

namespace bivicap {

void adadelta_update_span(std::span<double> x, std::span<const double> g,
                          std::span<double> acc_g_sq, std::span<double> acc_dx_sq,
                          double rho, double eps) {
  if (x.size() != g.size() || x.size() != acc_g_sq.size() ||
      x.size() != acc_dx_sq.size())
    throw ShapeError("adadelta_update: buffer sizes disagree");
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc_g_sq[i] = rho * acc_g_sq[i] + (1.0 - rho) * g[i] * g[i];
    const double dx = -std::sqrt(acc_dx_sq[i] + eps) /
                      std::sqrt(acc_g_sq[i] + eps) * g[i];
    acc_dx_sq[i] = rho * acc_dx_sq[i] + (1.0 - rho) * dx * dx;
    x[i] += dx;
  }
}

namespace {

std::vector<Matrix*> tensor_list(ModelParams& p) {
  std::vector<Matrix*> out;
  p.for_each_tensor([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

}  // namespace

void adadelta_update(ModelParams& params, const GradientSet& grads,
                     AdadeltaState& state) {
  auto xs = tensor_list(params);
  auto gs = tensor_list(const_cast<GradientSet&>(grads));
  auto eg = tensor_list(state.acc_grad_sq);
  auto ed = tensor_list(state.acc_delta_sq);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!xs[i]->same_shape(*gs[i]))
      throw ShapeError("adadelta_update: param " + xs[i]->shape_str() +
                       " vs gradient " + gs[i]->shape_str());
    adadelta_update_span(xs[i]->flat(), gs[i]->flat(), eg[i]->flat(),
                         ed[i]->flat(), state.rho, state.eps);
  }
}

double gradient_norm(const GradientSet& grads) {
  double sq = 0.0;
  grads.for_each_tensor([&](const std::string&, const Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) sq += m[i] * m[i];
  });
  return std::sqrt(sq);
}

void clip_gradients(GradientSet& grads, double max_norm) {
  const double norm = gradient_norm(grads);
  if (norm <= max_norm || norm == 0.0) return;
  const double factor = max_norm / norm;
  grads.for_each_tensor([&](const std::string&, Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] *= factor;
  });
}

}  // namespace bivicap
