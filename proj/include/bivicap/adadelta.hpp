#pragma once

#include <span>

#include "bivicap/model.hpp"

namespace bivicap {

/// Per-parameter accumulators E[g²] and E[Δx²], shape-mirroring the model.
struct AdadeltaState {
  GradientSet acc_grad_sq;
  GradientSet acc_delta_sq;
  double rho = 0.95;
  double eps = 1e-6;

  explicit AdadeltaState(const ModelDims& dims, double rho = 0.95,
                         double eps = 1e-6)
      : acc_grad_sq(GradientSet::zeros(dims)),
        acc_delta_sq(GradientSet::zeros(dims)),
        rho(rho),
        eps(eps) {}
};

/// Entrywise: E[g²] ← ρE[g²]+(1−ρ)g²; Δx = −√(E[Δx²]+ε)/√(E[g²]+ε)·g;
/// E[Δx²] ← ρE[Δx²]+(1−ρ)Δx²; x ← x+Δx.
void adadelta_update(ModelParams& params, const GradientSet& grads,
                     AdadeltaState& state);

/// The same update over flat buffers (the matrix form loops over this).
void adadelta_update_span(std::span<double> x, std::span<const double> g,
                          std::span<double> acc_g_sq, std::span<double> acc_dx_sq,
                          double rho, double eps);

double gradient_norm(const GradientSet& grads);
/// Scales the whole set down when its global norm exceeds max_norm.
void clip_gradients(GradientSet& grads, double max_norm);

}  // namespace bivicap
