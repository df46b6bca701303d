#ifndef DKPC_OPTIM_HPP
#define DKPC_OPTIM_HPP

#include <functional>
#include <string>
#include <vector>

#include "dkpc/rng.hpp"
#include "dkpc/tensor.hpp"

namespace dkpc {

// Adam with bias correction. Moments live as f32 tensors (same storage rule
// as parameters); the update arithmetic runs in double.
class Adam {
 public:
  struct Config {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  explicit Adam(std::vector<Parameter*> params) : Adam(std::move(params), Config()) {}
  Adam(std::vector<Parameter*> params, Config cfg);

  // One update from the gradients currently held in each Parameter::grad.
  // Throws NumericError naming the parameter if a gradient is non-finite.
  void step();

  void zero_grad();
  double lr() const { return cfg_.lr; }
  void set_lr(double lr) { cfg_.lr = lr; }
  long step_count() const { return step_; }

  // Moment access for checkpointing.
  struct Slot {
    Tensor m;
    Tensor v;
  };
  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Parameter*>& params() const { return params_; }
  void set_step_count(long t) { step_ = t; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Slot> slots_;
  Config cfg_;
  long step_ = 0;
};

// Global-norm gradient clipping across all parameters; returns the norm
// before clipping.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

// Central-difference gradient verification.
//
//   loss_and_backward : zeroes grads, builds the graph, runs backward, and
//                       returns the loss; leaves analytic grads in params.
//   loss_only         : rebuilds the graph and returns the loss.
//
// Relative error is |analytic - numeric| / max(0.1, |analytic|, |numeric|),
// i.e. absolute near zero and relative for large gradients.
struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  int coords_checked = 0;
  bool passed(double tol) const { return max_rel_err < tol; }
};

GradCheckReport check_gradients(const std::vector<Parameter*>& params,
                                const std::function<double()>& loss_and_backward,
                                const std::function<double()>& loss_only,
                                double eps = 1e-3,
                                int max_coords_per_param = -1,  // -1: all coordinates
                                Rng* rng = nullptr);

}  // namespace dkpc

#endif  // DKPC_OPTIM_HPP
