#pragma once

#include <cstdint>
#include <vector>

#include "tdn/network.hpp"
#include "tdn/rmsprop.hpp"
#include "tdn/rng.hpp"

namespace tdn {

/// Variational autoencoder: a shared encoder trunk, mean / log-variance
/// heads, and a decoder. The log-variance parameterization keeps sigma^2
/// positive; raw log-variances are clamped to [-10, 10] before
/// exponentiation so early training cannot overflow.
struct VaeModel {
    Network trunk;
    Network mean_head;
    Network logvar_head;
    Network decoder;
    std::size_t latent_dim = 0;
    int n_samples = 1;      // Monte Carlo samples per forward
    double lambda_v = 1.0;  // KL weight
    bool pretrained = false;

    std::size_t obs_dim() const { return trunk.in_dim(); }
    void set_frozen(bool frozen);
    bool all_frozen() const;
};

void validate_vae(const VaeModel& m);

struct LatentBatch {
    Matrix mean;                 // N x latent
    Matrix logvar;               // N x latent (clamped)
    std::vector<Matrix> noise;   // per sample s: N x latent, standard normal
    std::vector<Matrix> sample;  // per sample s: mean + exp(logvar/2) .* noise
};

struct VaeCache {
    ForwardCache trunk;
    ForwardCache mean_head;
    ForwardCache logvar_head;
    std::vector<ForwardCache> decoder;  // one per Monte Carlo sample
    Matrix logvar_mask;                 // 1 inside the clamp window, 0 outside
};

struct VaeForward {
    Matrix recon;                      // N x m, mean over Monte Carlo samples
    std::vector<Matrix> recon_sample;  // per-sample decoder outputs
    LatentBatch latent;
    VaeCache cache;
};

VaeForward vae_forward(const VaeModel& m, const Matrix& batch, RngStream& rng,
                       int n_samples_override = 0);

struct VaeLoss {
    double total = 0.0;
    double recon_term = 0.0;
    double kl_term = 0.0;  // already averaged over the batch, before lambda_v
};

/// J_V = (1/N)(1/N_s) sum_k sum_s ||z(k) - zhat_s(k)||^2
///     + lambda_v * (1/N) sum_k 0.5 * sum_j (mu^2 + sigma^2 - 1 - log sigma^2).
VaeLoss vae_loss(const VaeModel& m, const Matrix& batch, const VaeForward& fwd);

struct VaeGrads {
    NetworkGrads trunk, mean_head, logvar_head, decoder;
};

VaeGrads zero_vae_grads(const VaeModel& m);

/// Gradient of vae_loss. Returns dJ/d input (the input appears both as the
/// encoder input and as the reconstruction target); parameter gradients are
/// accumulated into `grads` when non-null.
Matrix vae_backward(const VaeModel& m, const Matrix& batch, const VaeForward& fwd,
                    VaeGrads* grads);

struct PretrainHyper {
    int epochs = 15;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
};

struct VaeEpochLoss {
    int epoch;
    double total, recon, kl;
};

/// RMSProp pretraining on standardized normal data. Batches are reshuffled
/// each epoch from a named substream of `seed`. Throws TrainError (naming
/// the epoch) if the loss diverges.
std::vector<VaeEpochLoss> pretrain_vae(VaeModel& m, const Matrix& data,
                                       const PretrainHyper& hyper);

} // namespace tdn
