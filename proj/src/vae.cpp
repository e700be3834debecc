#include "tdn/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdn/errors.hpp"

namespace tdn {

namespace {
constexpr double kLogvarClamp = 10.0;
}

void VaeModel::set_frozen(bool frozen) {
    trunk.set_frozen(frozen);
    mean_head.set_frozen(frozen);
    logvar_head.set_frozen(frozen);
    decoder.set_frozen(frozen);
}

bool VaeModel::all_frozen() const {
    return trunk.all_frozen() && mean_head.all_frozen() && logvar_head.all_frozen() &&
           decoder.all_frozen();
}

void validate_vae(const VaeModel& m) {
    validate_network(m.trunk);
    validate_network(m.mean_head);
    validate_network(m.logvar_head);
    validate_network(m.decoder);
    if (m.latent_dim == 0) throw ConfigError("vae: latent_dim is zero");
    if (m.mean_head.in_dim() != m.trunk.out_dim() ||
        m.logvar_head.in_dim() != m.trunk.out_dim())
        throw ConfigError("vae: heads do not consume the trunk output");
    if (m.mean_head.out_dim() != m.latent_dim || m.logvar_head.out_dim() != m.latent_dim)
        throw ConfigError("vae: heads must emit latent_dim values");
    if (m.decoder.in_dim() != m.latent_dim) throw ConfigError("vae: decoder input != latent_dim");
    if (m.decoder.out_dim() != m.trunk.in_dim())
        throw ConfigError("vae: decoder output != observation dim");
    if (m.n_samples < 1) throw ConfigError("vae: n_samples must be >= 1");
    if (m.lambda_v <= 0.0) throw ConfigError("vae: lambda_v must be positive");
}

VaeForward vae_forward(const VaeModel& m, const Matrix& batch, RngStream& rng,
                       int n_samples_override) {
    const int ns = n_samples_override > 0 ? n_samples_override : m.n_samples;
    const std::size_t n = batch.rows();
    const std::size_t q = m.latent_dim;

    VaeForward out;
    Matrix trunk_out = forward(m.trunk, batch, &out.cache.trunk);
    out.latent.mean = forward(m.mean_head, trunk_out, &out.cache.mean_head);
    Matrix logvar_raw = forward(m.logvar_head, trunk_out, &out.cache.logvar_head);

    out.latent.logvar = Matrix(n, q);
    out.cache.logvar_mask = Matrix(n, q);
    for (std::size_t i = 0; i < logvar_raw.data().size(); ++i) {
        const double g = logvar_raw.data()[i];
        const bool inside = g > -kLogvarClamp && g < kLogvarClamp;
        out.cache.logvar_mask.data()[i] = inside ? 1.0 : 0.0;
        out.latent.logvar.data()[i] = std::clamp(g, -kLogvarClamp, kLogvarClamp);
    }

    out.recon = Matrix(n, m.obs_dim());
    out.latent.noise.reserve(ns);
    out.latent.sample.reserve(ns);
    out.recon_sample.reserve(ns);
    out.cache.decoder.reserve(ns);
    for (int s = 0; s < ns; ++s) {
        Matrix xi(n, q);
        for (double& v : xi.data()) v = rng.normal();
        Matrix w(n, q);
        for (std::size_t i = 0; i < w.data().size(); ++i)
            w.data()[i] = out.latent.mean.data()[i] +
                          std::exp(0.5 * out.latent.logvar.data()[i]) * xi.data()[i];
        if (!w.all_finite()) throw NumericError("vae: non-finite latent sample");
        out.cache.decoder.emplace_back();
        Matrix rec = forward(m.decoder, w, &out.cache.decoder.back());
        for (std::size_t i = 0; i < rec.data().size(); ++i)
            out.recon.data()[i] += rec.data()[i] / static_cast<double>(ns);
        out.latent.noise.push_back(std::move(xi));
        out.latent.sample.push_back(std::move(w));
        out.recon_sample.push_back(std::move(rec));
    }
    return out;
}

VaeLoss vae_loss(const VaeModel& m, const Matrix& batch, const VaeForward& fwd) {
    const std::size_t n = batch.rows();
    const std::size_t ns = fwd.recon_sample.size();
    if (!fwd.latent.mean.same_shape(Matrix(n, m.latent_dim)))
        throw ShapeError("vae_loss: forward result does not match batch");

    VaeLoss loss;
    for (const Matrix& rec : fwd.recon_sample) {
        for (std::size_t i = 0; i < rec.data().size(); ++i) {
            const double d = batch.data()[i] - rec.data()[i];
            loss.recon_term += d * d;
        }
    }
    loss.recon_term /= static_cast<double>(n * ns);

    for (std::size_t i = 0; i < fwd.latent.mean.data().size(); ++i) {
        const double mu = fwd.latent.mean.data()[i];
        const double lv = fwd.latent.logvar.data()[i];
        loss.kl_term += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
    loss.kl_term /= static_cast<double>(n);

    loss.total = loss.recon_term + m.lambda_v * loss.kl_term;
    return loss;
}

VaeGrads zero_vae_grads(const VaeModel& m) {
    return {zero_grads(m.trunk), zero_grads(m.mean_head), zero_grads(m.logvar_head),
            zero_grads(m.decoder)};
}

Matrix vae_backward(const VaeModel& m, const Matrix& batch, const VaeForward& fwd,
                    VaeGrads* grads) {
    const std::size_t n = batch.rows();
    const std::size_t ns = fwd.recon_sample.size();
    const std::size_t q = m.latent_dim;
    const double recon_w = 2.0 / static_cast<double>(n * ns);

    VaeGrads local = grads ? VaeGrads{} : zero_vae_grads(m);
    VaeGrads& g = grads ? *grads : local;
    if (g.decoder.weight.empty()) g = zero_vae_grads(m);

    Matrix d_input_direct(n, batch.cols());
    Matrix d_mean(n, q);
    Matrix d_logvar(n, q);

    for (std::size_t s = 0; s < ns; ++s) {
        const Matrix& rec = fwd.recon_sample[s];
        Matrix d_rec(n, batch.cols());
        for (std::size_t i = 0; i < rec.data().size(); ++i) {
            const double diff = rec.data()[i] - batch.data()[i];
            d_rec.data()[i] = recon_w * diff;
            d_input_direct.data()[i] -= recon_w * diff;  // target side of ||z - zhat||^2
        }
        Matrix d_latent = backward(m.decoder, fwd.cache.decoder[s], d_rec, g.decoder);
        // w = mu + exp(logvar/2) .* xi
        const Matrix& xi = fwd.latent.noise[s];
        for (std::size_t i = 0; i < d_latent.data().size(); ++i) {
            d_mean.data()[i] += d_latent.data()[i];
            d_logvar.data()[i] += d_latent.data()[i] * xi.data()[i] * 0.5 *
                                  std::exp(0.5 * fwd.latent.logvar.data()[i]);
        }
    }

    // KL term: d/dmu = mu, d/dlogvar = 0.5*(exp(logvar) - 1), weighted lambda/N.
    const double kl_w = m.lambda_v / static_cast<double>(n);
    for (std::size_t i = 0; i < d_mean.data().size(); ++i) {
        d_mean.data()[i] += kl_w * fwd.latent.mean.data()[i];
        d_logvar.data()[i] += kl_w * 0.5 * (std::exp(fwd.latent.logvar.data()[i]) - 1.0);
        d_logvar.data()[i] *= fwd.cache.logvar_mask.data()[i];  // clamp gradient
    }

    Matrix d_trunk_mean = backward(m.mean_head, fwd.cache.mean_head, d_mean, g.mean_head);
    Matrix d_trunk_lv = backward(m.logvar_head, fwd.cache.logvar_head, d_logvar, g.logvar_head);
    for (std::size_t i = 0; i < d_trunk_mean.data().size(); ++i)
        d_trunk_mean.data()[i] += d_trunk_lv.data()[i];
    Matrix d_input = backward(m.trunk, fwd.cache.trunk, d_trunk_mean, g.trunk);

    for (std::size_t i = 0; i < d_input.data().size(); ++i)
        d_input.data()[i] += d_input_direct.data()[i];
    return d_input;
}

std::vector<VaeEpochLoss> pretrain_vae(VaeModel& m, const Matrix& data,
                                       const PretrainHyper& hyper) {
    validate_vae(m);
    if (data.rows() == 0) throw DataError("pretrain_vae: empty dataset");
    if (data.cols() != m.obs_dim()) throw ShapeError("pretrain_vae: data dim != vae input dim");

    RmsPropConfig opt{hyper.learning_rate, 0.9, 1e-8};
    OptimizerState st_trunk = make_optimizer_state(m.trunk);
    OptimizerState st_mean = make_optimizer_state(m.mean_head);
    OptimizerState st_lv = make_optimizer_state(m.logvar_head);
    OptimizerState st_dec = make_optimizer_state(m.decoder);

    RngStream noise(hyper.seed, "vae.noise");
    RngStream shuffle(hyper.seed, "vae.shuffle");

    std::vector<VaeEpochLoss> trace;
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle.engine());
        double sum_total = 0, sum_recon = 0, sum_kl = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t count = std::min(hyper.batch_size, order.size() - start);
            Matrix batch(count, data.cols());
            for (std::size_t i = 0; i < count; ++i)
                for (std::size_t j = 0; j < data.cols(); ++j)
                    batch(i, j) = data(order[start + i], j);

            VaeForward fwd = vae_forward(m, batch, noise);
            VaeLoss loss = vae_loss(m, batch, fwd);
            if (!std::isfinite(loss.total))
                throw TrainError("vae pretraining diverged at epoch " + std::to_string(epoch + 1));

            VaeGrads grads = zero_vae_grads(m);
            vae_backward(m, batch, fwd, &grads);
            rmsprop_step(m.trunk, grads.trunk, st_trunk, opt);
            rmsprop_step(m.mean_head, grads.mean_head, st_mean, opt);
            rmsprop_step(m.logvar_head, grads.logvar_head, st_lv, opt);
            rmsprop_step(m.decoder, grads.decoder, st_dec, opt);

            sum_total += loss.total;
            sum_recon += loss.recon_term;
            sum_kl += loss.kl_term;
            ++batches;
        }
        trace.push_back({epoch + 1, sum_total / batches, sum_recon / batches, sum_kl / batches});
    }
    if (hyper.epochs > 0) m.pretrained = true;
    return trace;
}

} // namespace tdn
