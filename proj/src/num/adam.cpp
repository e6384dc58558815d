#include "moldiff/num/adam.hpp"

#include <cmath>

namespace moldiff::num {

Adam::Adam(ParamRefs params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Param* p : params_) {
        m_.push_back(Array::Zero(p->value.size()));
        v_.push_back(Array::Zero(p->value.size()));
    }
}

void Adam::zero_grad() {
    for (Param* p : params_) p->zero_grad();
}

void Adam::step() {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        if (p.grad.size() != p.value.size())
            fail(ErrorCategory::shape,
                 "adam: grad length " + std::to_string(p.grad.size()) + " vs param " +
                     std::to_string(p.value.size()) + " (" + p.name + ")");
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad * p.grad;
        Array m_hat = m_[i] / bc1;
        Array v_hat = v_[i] / bc2;
        p.value -= cfg_.lr * m_hat / (v_hat.sqrt() + cfg_.eps_stab);
    }
}

}  // namespace moldiff::num
