#pragma once

#include <string>
#include <vector>

#include "fieldcast/field.hpp"

namespace fieldcast {

enum class SystemKind { heat, wave, burgers };

SystemKind system_from_string(const std::string& s);
const char* to_string(SystemKind k);

// Single trainable scalar in lattice units: the unit-step update absorbs
// dt and dx, so alpha_eff = alpha*dt/dx^2, c2_eff = (c*dt/dx)^2,
// beta_eff = beta*dt/dx^2.
struct PhysParams {
  std::string name;   // alpha_eff | c2_eff | beta_eff
  double value = 0.0;
  bool trainable = true;
  bool non_negative = true;  // clamped at >= 0 after each gradient step
};

// Known-physics right-hand side f(U; theta) plus the metadata the cell
// and simulator need: temporal order, channel count, stencils, boundary.
struct PdeModel {
  SystemKind kind = SystemKind::heat;
  int temporal_order = 1;  // n
  int channels = 1;
  PhysParams params;
  BoundaryRule boundary = BoundaryRule::dirichlet_zero;
  StencilKernel d10, d01, d20, d02;
};

// heat: alpha_eff * laplacian, dirichlet. wave: c2_eff * laplacian,
// dirichlet, n = 2. burgers: two channels, advection plus beta_eff *
// laplacian, neumann.
PdeModel make_pde_model(SystemKind kind, double param_value);

// One evaluation of f on a field with the model's current parameters.
Field f_eval(const PdeModel& model, const Field& u);

struct FAdjoint {
  Field d_u;
  double d_theta = 0.0;
};

// Exact vector-Jacobian product of f_eval at u.
FAdjoint f_adjoint(const PdeModel& model, const Field& u,
                   const Field& upstream);

// Next-step homogeneous update shared by the simulator and the recurrent
// cell so both follow the same floating-point algebra bit for bit:
//   collapse(stack, temporal coefficients of n) + f_eval(stack newest).
Field homogeneous_next(const PdeModel& model, const FieldStack& past);

// Coefficients of the finite-difference approximation of d^m/dt^m applied
// to the past maps: entry p-1 is (-1)^(p+1) * C(m, p).
std::vector<double> temporal_coeffs(int m);

}  // namespace fieldcast
