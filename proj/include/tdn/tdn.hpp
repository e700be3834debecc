#pragma once

#include <cstdint>
#include <vector>

#include "tdn/idn.hpp"
#include "tdn/scaler.hpp"
#include "tdn/vae.hpp"

namespace tdn {

/// Random training faults: each entry is hit with probability p_add; hit
/// entries receive a uniform amplitude in [amp_low, amp_high] (standardized
/// units) with a random sign.
struct FaultSampler {
    double p_add = 0.1;
    std::vector<double> amp_low;   // per variable
    std::vector<double> amp_high;  // per variable

    static FaultSampler uniform(std::size_t dim, double p_add = 0.1, double lo = 0.5,
                                double hi = 3.0) {
        FaultSampler s;
        s.p_add = p_add;
        s.amp_low.assign(dim, lo);
        s.amp_high.assign(dim, hi);
        return s;
    }

    /// Z_f = Z_n + generate(Z_n); returns the fault matrix itself.
    Matrix generate(const Matrix& normal, RngStream& rng) const;
};

struct TdnModel {
    IdnModel idn;    // trainable
    VaeModel vae;    // frozen during transfer training
    Scaler scaler;   // fitted on the normal training data
};

struct TdnForward {
    Matrix delta_n, delta_f;  // IDN outputs
    Matrix v_n, v_f;          // z + D(z)
    VaeForward vae_n, vae_f;
    IdnCache idn_n, idn_f;
};

TdnForward tdn_forward(const TdnModel& m, const Matrix& batch_n, const Matrix& batch_f,
                       RngStream& rng);

struct TdnLoss {
    double total = 0.0;
    double jv_n = 0.0;
    double jv_f = 0.0;
    double jmmd = 0.0;
};

/// J_tl = J_V(V^n) + J_V(V^f) + lambda_tl * || mean(V^n) - mean(V^f) ||^2.
TdnLoss tdn_loss(const TdnModel& m, const TdnForward& fwd, double lambda_tl);

/// Gradient of J_tl with respect to the IDN core parameters, through the
/// frozen VAE. The VAE receives pass-through gradients only.
NetworkGrads tdn_backward(const TdnModel& m, const Matrix& batch_n, const Matrix& batch_f,
                          const TdnForward& fwd, double lambda_tl);

struct TdnTrainHyper {
    int epochs = 15;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double lambda_tl = 0.1;
    std::uint64_t seed = 1;
};

struct TdnBatchLoss {
    int epoch;
    int batch;
    double jv_n, jv_f, jmmd, total;
};

/// Algorithm: per epoch draw a fresh random faulty dataset, then per batch
/// forward both domains, compute J_tl and RMSProp-update the IDN only. The
/// VAE must arrive frozen and is checksum-verified unchanged at exit.
std::vector<TdnBatchLoss> train_tdn(TdnModel& m, const Matrix& normal_std,
                                    const FaultSampler& sampler, const TdnTrainHyper& hyper);

} // namespace tdn
