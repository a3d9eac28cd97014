#include "fieldcast/pde.hpp"

#include <cmath>

#include "fieldcast/errors.hpp"

namespace fieldcast {

SystemKind system_from_string(const std::string& s) {
  if (s == "heat") return SystemKind::heat;
  if (s == "wave") return SystemKind::wave;
  if (s == "burgers") return SystemKind::burgers;
  throw config_error("unknown system '" + s + "' (heat|wave|burgers)");
}

const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::heat:
      return "heat";
    case SystemKind::wave:
      return "wave";
    case SystemKind::burgers:
      return "burgers";
  }
  return "?";
}

PdeModel make_pde_model(SystemKind kind, double param_value) {
  PdeModel m;
  m.kind = kind;
  m.d10 = make_d10();
  m.d01 = make_d01();
  m.d20 = make_d20();
  m.d02 = make_d02();
  switch (kind) {
    case SystemKind::heat:
      m.temporal_order = 1;
      m.channels = 1;
      m.params = {"alpha_eff", param_value, true, true};
      m.boundary = BoundaryRule::dirichlet_zero;
      break;
    case SystemKind::wave:
      m.temporal_order = 2;
      m.channels = 1;
      m.params = {"c2_eff", param_value, true, true};
      m.boundary = BoundaryRule::dirichlet_zero;
      break;
    case SystemKind::burgers:
      m.temporal_order = 1;
      m.channels = 2;
      m.params = {"beta_eff", param_value, true, true};
      m.boundary = BoundaryRule::neumann_replicate;
      break;
  }
  return m;
}

namespace {

void check_input(const PdeModel& model, const Field& u, const char* where) {
  if (u.channels() != model.channels) {
    throw shape_error(std::string(where) + ": field has " +
                      std::to_string(u.channels()) + " channels, model " +
                      to_string(model.kind) + " expects " +
                      std::to_string(model.channels));
  }
  if (!u.all_finite()) {
    throw numeric_error(std::string(where) + ": non-finite input field");
  }
}

Field channel_view(const Field& u, int c) {
  Field out(1, u.height(), u.width());
  for (int i = 0; i < u.height(); ++i)
    for (int j = 0; j < u.width(); ++j) out.at(0, i, j) = u.at(c, i, j);
  return out;
}

void add_channel(Field& dst, int c, const Field& src, double scale = 1.0) {
  for (int i = 0; i < dst.height(); ++i)
    for (int j = 0; j < dst.width(); ++j)
      dst.at(c, i, j) += scale * src.at(0, i, j);
}

Field laplacian(const PdeModel& model, const Field& single) {
  Field lap = stencil_apply(single, model.d20, model.boundary);
  lap += stencil_apply(single, model.d02, model.boundary);
  return lap;
}

}  // namespace

Field f_eval(const PdeModel& model, const Field& u) {
  check_input(model, u, "f_eval");
  const double theta = model.params.value;
  Field out(u.channels(), u.height(), u.width());

  if (model.kind == SystemKind::heat || model.kind == SystemKind::wave) {
    Field lap = laplacian(model, u);
    out = lap * theta;
    return out;
  }

  // burgers: per channel i, -u1*d10(ui) - u2*d01(ui) + beta*lap(ui)
  Field u1 = channel_view(u, 0);
  Field u2 = channel_view(u, 1);
  for (int c = 0; c < 2; ++c) {
    Field uc = channel_view(u, c);
    Field dx = stencil_apply(uc, model.d10, model.boundary);
    Field dy = stencil_apply(uc, model.d01, model.boundary);
    Field lap = laplacian(model, uc);
    Field term(1, u.height(), u.width());
    for (int i = 0; i < u.height(); ++i) {
      for (int j = 0; j < u.width(); ++j) {
        term.at(0, i, j) = -u1.at(0, i, j) * dx.at(0, i, j) -
                           u2.at(0, i, j) * dy.at(0, i, j) +
                           theta * lap.at(0, i, j);
      }
    }
    add_channel(out, c, term);
  }
  return out;
}

FAdjoint f_adjoint(const PdeModel& model, const Field& u,
                   const Field& upstream) {
  check_input(model, u, "f_adjoint");
  check_same_shape(u, upstream, "f_adjoint");
  const double theta = model.params.value;
  FAdjoint adj;
  adj.d_u = Field(u.channels(), u.height(), u.width());

  if (model.kind == SystemKind::heat || model.kind == SystemKind::wave) {
    Field lap = laplacian(model, u);
    adj.d_theta = upstream.dot(lap);
    Field back = stencil_apply_adjoint(upstream, model.d20, model.boundary);
    back += stencil_apply_adjoint(upstream, model.d02, model.boundary);
    adj.d_u = back * theta;
    return adj;
  }

  Field u1 = channel_view(u, 0);
  Field u2 = channel_view(u, 1);
  Field g1(1, u.height(), u.width());  // dL/du1
  Field g2(1, u.height(), u.width());  // dL/du2
  std::vector<Field> g_chan;
  g_chan.emplace_back(1, u.height(), u.width());
  g_chan.emplace_back(1, u.height(), u.width());
  adj.d_theta = 0.0;

  for (int c = 0; c < 2; ++c) {
    Field uc = channel_view(u, c);
    Field gc = channel_view(upstream, c);
    Field dx = stencil_apply(uc, model.d10, model.boundary);
    Field dy = stencil_apply(uc, model.d01, model.boundary);
    Field lap = laplacian(model, uc);

    adj.d_theta += gc.dot(lap);

    // pointwise multiplier paths: -gc.*dx into u1, -gc.*dy into u2
    for (int i = 0; i < u.height(); ++i) {
      for (int j = 0; j < u.width(); ++j) {
        g1.at(0, i, j) -= gc.at(0, i, j) * dx.at(0, i, j);
        g2.at(0, i, j) -= gc.at(0, i, j) * dy.at(0, i, j);
      }
    }

    // stencil paths back into channel c
    Field up_dx(1, u.height(), u.width());
    Field up_dy(1, u.height(), u.width());
    for (int i = 0; i < u.height(); ++i) {
      for (int j = 0; j < u.width(); ++j) {
        up_dx.at(0, i, j) = -gc.at(0, i, j) * u1.at(0, i, j);
        up_dy.at(0, i, j) = -gc.at(0, i, j) * u2.at(0, i, j);
      }
    }
    g_chan[c] += stencil_apply_adjoint(up_dx, model.d10, model.boundary);
    g_chan[c] += stencil_apply_adjoint(up_dy, model.d01, model.boundary);
    Field lap_back = stencil_apply_adjoint(gc, model.d20, model.boundary);
    lap_back += stencil_apply_adjoint(gc, model.d02, model.boundary);
    g_chan[c].axpy(theta, lap_back);
  }

  add_channel(adj.d_u, 0, g1);
  add_channel(adj.d_u, 1, g2);
  add_channel(adj.d_u, 0, g_chan[0]);
  add_channel(adj.d_u, 1, g_chan[1]);
  return adj;
}

Field homogeneous_next(const PdeModel& model, const FieldStack& past) {
  if (past.depth() != model.temporal_order) {
    throw shape_error("homogeneous_next: stack depth " +
                      std::to_string(past.depth()) + " vs temporal order " +
                      std::to_string(model.temporal_order));
  }
  Field h = weighted_collapse(past, temporal_coeffs(model.temporal_order));
  h += f_eval(model, past.entry(0));
  return h;
}

std::vector<double> temporal_coeffs(int m) {
  if (m < 1) throw shape_error("temporal_coeffs: order must be >= 1");
  std::vector<double> w(m);
  double binom = 1.0;  // C(m, p), built incrementally
  for (int p = 1; p <= m; ++p) {
    binom = binom * (m - p + 1) / p;
    w[p - 1] = ((p + 1) % 2 == 0 ? 1.0 : -1.0) * binom;
  }
  return w;
}

}  // namespace fieldcast
