#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fieldcast/field.hpp"
#include "fieldcast/pde.hpp"

namespace fieldcast {

// closed_loop feeds the cell its own predictions after warmup (the
// long-horizon forecasting regime); teacher_forced feeds observations at
// every step (used by exactness tests and online adaptation).
enum class Regime { closed_loop, teacher_forced };

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

// Scale factors on the three loss terms. Standard training uses
// {1, 1, lambda}; online adaptation re-fits against {1, 0, 0}.
struct LossWeights {
  double pred = 1.0;
  double source_pred = 1.0;
  double sparse = 0.0;
};

struct LossBreakdown {
  double l_pred = 0.0;
  double l_source_pred = 0.0;
  double l_source_sparse = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

struct RolloutOutput {
  LossBreakdown loss;
  // u_hat[i] / v_hat[i] predict frame (first_scored + i). v_hat may be
  // empty for models without a source stream.
  std::vector<Field> u_hat;
  std::vector<Field> v_hat;
  int first_scored = 0;
};

struct ParamGroupInfo {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// A trainable sequence model: rolls over a frame sequence scoring the
// losses, optionally accumulating exact BPTT parameter gradients, and
// forecasts closed-loop from warmup frames alone.
class RolloutModel {
 public:
  virtual ~RolloutModel() = default;

  virtual std::string tag() const = 0;
  virtual SystemKind system() const = 0;
  virtual int warmup_frames() const = 0;  // n + K
  virtual int field_channels() const = 0;

  // frames must hold at least warmup_frames() + 1 entries. When grads is
  // non-null it must be param_count() long; gradients are accumulated.
  virtual RolloutOutput rollout(const std::vector<Field>& frames,
                                Regime regime, const LossWeights& w,
                                std::vector<double>* grads) const = 0;

  // warmup.size() == warmup_frames(); rolls closed-loop `horizon` steps.
  virtual RolloutOutput forecast(const std::vector<Field>& warmup,
                                 int horizon) const = 0;

  virtual std::size_t param_count() const = 0;
  virtual void get_params(std::vector<double>& out) const = 0;
  virtual void set_params(const std::vector<double>& in) = 0;
  virtual std::vector<ParamGroupInfo> param_groups() const = 0;
  // Re-impose parameter constraints (non-negative physical scalars).
  virtual void clamp_params() {}
};

}  // namespace fieldcast
