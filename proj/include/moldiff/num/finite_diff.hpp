#pragma once

#include <functional>

#include "moldiff/num/tensor.hpp"

namespace moldiff::num {

// Central-difference gradient check, the test-side oracle for every
// analytic gradient in this project.
//
// `f(compute_grad)` evaluates the scalar objective at the current
// parameter values; when compute_grad is true it must also run backward
// so that Param::grad holds the analytic gradient (grads are zeroed here
// beforehand). Returns max over all parameter coordinates of
//   |analytic - central_difference| / max(1, |analytic|).
double finite_diff_check(const std::function<double(bool)>& f, const ParamRefs& params,
                         double eps = 1e-5);

}  // namespace moldiff::num
