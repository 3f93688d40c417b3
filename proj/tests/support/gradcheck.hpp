#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "padme/tensor.hpp"

namespace padme::testing {

struct GradCheck {
  double max_error = 0.0;
  std::size_t entries = 0;
  std::string worst;  // parameter[index] with the largest error
};

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares backward() against central differences for the entries of every
// parameter, at most `max_per_param` evenly spaced ones each (0 = all).
// `build` must construct a scalar loss on a fresh tape; it is called once per
// perturbation.
inline GradCheck check_gradients(std::span<Parameter* const> params, const std::function<Var(Tape&)>& build,
                                 double h = 1e-5, std::size_t max_per_param = 0) {
  zero_grads(params);
  {
    Tape tape;
    Var loss = build(tape);
    tape.forward();
    tape.backward(loss);
  }
  auto loss_at = [&] {
    Tape tape;
    Var loss = build(tape);
    tape.forward();
    return tape.value(loss)[0];
  };

  GradCheck out;
  for (Parameter* p : params) {
    const std::size_t n = p->value.size();
    const std::size_t stride = max_per_param == 0 || n <= max_per_param ? 1 : (n + max_per_param - 1) / max_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = loss_at();
      p->value[i] = saved - h;
      const double down = loss_at();
      p->value[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double err = relative_error(p->grad[i], numeric);
      ++out.entries;
      if (err >= out.max_error) {
        out.max_error = err;
        out.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

}  // namespace padme::testing
