#include "moldiff/num/finite_diff.hpp"

#include <cmath>

namespace moldiff::num {

double finite_diff_check(const std::function<double(bool)>& f, const ParamRefs& params,
                         double eps) {
    for (Param* p : params) p->zero_grad();
    double base = f(true);
    if (!std::isfinite(base)) fail(ErrorCategory::numeric, "finite_diff_check: non-finite loss");

    std::vector<Array> analytic;
    analytic.reserve(params.size());
    for (const Param* p : params) analytic.push_back(p->grad);

    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = *params[i];
        for (Eigen::Index k = 0; k < p.value.size(); ++k) {
            double saved = p.value[k];
            p.value[k] = saved + eps;
            double f_plus = f(false);
            p.value[k] = saved - eps;
            double f_minus = f(false);
            p.value[k] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
                fail(ErrorCategory::numeric, "finite_diff_check: non-finite evaluation");
            double numeric = (f_plus - f_minus) / (2.0 * eps);
            double a = analytic[i][k];
            double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
            if (err > worst) worst = err;
        }
    }
    return worst;
}

}  // namespace moldiff::num
