#pragma once

#include <cmath>

#include "tdn/network.hpp"

namespace tdn {

struct RmsPropConfig {
    double learning_rate = 1e-3;
    double decay = 0.9;      // canonical lecture value
    double epsilon = 1e-8;
};

/// Decaying average of squared gradients, one accumulator per parameter.
struct OptimizerState {
    std::vector<Matrix> weight_accum;
    std::vector<std::vector<double>> bias_accum;
};

inline OptimizerState make_optimizer_state(const Network& net) {
    OptimizerState st;
    for (const auto& s : net.spec) {
        st.weight_accum.emplace_back(s.out_dim, s.in_dim);
        st.bias_accum.emplace_back(s.out_dim, 0.0);
    }
    return st;
}

/// One RMSProp update:  acc <- decay*acc + (1-decay)*g^2,
/// theta <- theta - lr * g / sqrt(acc + eps).  Frozen layers are skipped
/// entirely (parameters and accumulators bitwise untouched).
inline void rmsprop_step(Network& net, const NetworkGrads& grads, OptimizerState& st,
                         const RmsPropConfig& cfg) {
    if (grads.weight.size() != net.num_layers() || st.weight_accum.size() != net.num_layers())
        throw ShapeError("rmsprop_step: layer count mismatch");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto& p = net.params[l];
        if (p.frozen) continue;
        if (!grads.weight[l].same_shape(p.weight) || grads.bias[l].size() != p.bias.size())
            throw ShapeError("rmsprop_step: gradient shape mismatch at layer " +
                             std::to_string(l));
        auto& wa = st.weight_accum[l].data();
        auto& w = p.weight.data();
        const auto& gw = grads.weight[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) {
            wa[i] = cfg.decay * wa[i] + (1.0 - cfg.decay) * gw[i] * gw[i];
            w[i] -= cfg.learning_rate * gw[i] / std::sqrt(wa[i] + cfg.epsilon);
        }
        auto& ba = st.bias_accum[l];
        const auto& gb = grads.bias[l];
        for (std::size_t i = 0; i < p.bias.size(); ++i) {
            ba[i] = cfg.decay * ba[i] + (1.0 - cfg.decay) * gb[i] * gb[i];
            p.bias[i] -= cfg.learning_rate * gb[i] / std::sqrt(ba[i] + cfg.epsilon);
        }
    }
}

} // namespace tdn
