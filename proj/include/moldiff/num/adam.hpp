#pragma once

#include <cstdint>

#include "moldiff/num/tensor.hpp"

namespace moldiff::num {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stab = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameters. Moment buffers
// are allocated zero at construction; step() reads Param::grad.
class Adam {
  public:
    Adam(ParamRefs params, AdamConfig cfg);

    void zero_grad();
    void step();
    std::int64_t step_count() const { return step_; }

    const Array& first_moment(std::size_t i) const { return m_[i]; }
    const Array& second_moment(std::size_t i) const { return v_[i]; }

  private:
    ParamRefs params_;
    AdamConfig cfg_;
    std::vector<Array> m_;
    std::vector<Array> v_;
    std::int64_t step_ = 0;
};

}  // namespace moldiff::num
