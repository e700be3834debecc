#include "tdn/tdn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdn/errors.hpp"
#include "tdn/model_io.hpp"

namespace tdn {

Matrix FaultSampler::generate(const Matrix& normal, RngStream& rng) const {
    if (amp_low.size() != normal.cols() || amp_high.size() != normal.cols())
        throw ShapeError("FaultSampler: amplitude bounds do not match data dimension");
    Matrix f(normal.rows(), normal.cols());
    for (std::size_t k = 0; k < normal.rows(); ++k) {
        for (std::size_t j = 0; j < normal.cols(); ++j) {
            if (!rng.bernoulli(p_add)) continue;
            const double amp = rng.uniform(amp_low[j], amp_high[j]);
            f(k, j) = rng.bernoulli(0.5) ? amp : -amp;
        }
    }
    return f;
}

TdnForward tdn_forward(const TdnModel& m, const Matrix& batch_n, const Matrix& batch_f,
                       RngStream& rng) {
    if (!batch_n.same_shape(batch_f))
        throw ShapeError("tdn_forward: normal and faulty batches must have equal shape");
    TdnForward out;
    try {
        out.delta_n = idn_forward(m.idn, batch_n, &out.idn_n);
        out.delta_f = idn_forward(m.idn, batch_f, &out.idn_f);
    } catch (const NumericError& e) {
        throw NumericError(std::string("tdn_forward (idn): ") + e.what());
    }
    out.v_n = batch_n;
    out.v_f = batch_f;
    for (std::size_t i = 0; i < out.v_n.data().size(); ++i) {
        out.v_n.data()[i] += out.delta_n.data()[i];
        out.v_f.data()[i] += out.delta_f.data()[i];
    }
    try {
        out.vae_n = vae_forward(m.vae, out.v_n, rng);
        out.vae_f = vae_forward(m.vae, out.v_f, rng);
    } catch (const NumericError& e) {
        throw NumericError(std::string("tdn_forward (vae): ") + e.what());
    }
    return out;
}

namespace {

double mmd_sq(const Matrix& a, const Matrix& b) {
    const auto ma = column_means(a);
    const auto mb = column_means(b);
    double s = 0.0;
    for (std::size_t j = 0; j < ma.size(); ++j) {
        const double d = ma[j] - mb[j];
        s += d * d;
    }
    return s;
}

} // namespace

TdnLoss tdn_loss(const TdnModel& m, const TdnForward& fwd, double lambda_tl) {
    TdnLoss loss;
    loss.jv_n = vae_loss(m.vae, fwd.v_n, fwd.vae_n).total;
    loss.jv_f = vae_loss(m.vae, fwd.v_f, fwd.vae_f).total;
    loss.jmmd = mmd_sq(fwd.v_n, fwd.v_f);
    loss.total = loss.jv_n + loss.jv_f + lambda_tl * loss.jmmd;
    return loss;
}

NetworkGrads tdn_backward(const TdnModel& m, const Matrix& batch_n, const Matrix& batch_f,
                          const TdnForward& fwd, double lambda_tl) {
    (void)batch_n;
    (void)batch_f;
    const std::size_t n = fwd.v_n.rows();
    const auto mean_n = column_means(fwd.v_n);
    const auto mean_f = column_means(fwd.v_f);

    // dJ/dV = VAE input gradient (encoder path + reconstruction target)
    //         + MMD term: +-(2*lambda/N)(mean_n - mean_f).
    Matrix d_vn = vae_backward(m.vae, fwd.v_n, fwd.vae_n, nullptr);
    Matrix d_vf = vae_backward(m.vae, fwd.v_f, fwd.vae_f, nullptr);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < fwd.v_n.cols(); ++j) {
            const double g = 2.0 * lambda_tl * (mean_n[j] - mean_f[j]) / static_cast<double>(n);
            d_vn(k, j) += g;
            d_vf(k, j) -= g;
        }
    }

    // V = Z + D(Z), so dJ/d delta = dJ/dV.
    NetworkGrads grads = zero_grads(m.idn.core);
    idn_backward(m.idn, fwd.idn_n, d_vn, grads);
    idn_backward(m.idn, fwd.idn_f, d_vf, grads);
    return grads;
}

std::vector<TdnBatchLoss> train_tdn(TdnModel& m, const Matrix& normal_std,
                                    const FaultSampler& sampler, const TdnTrainHyper& hyper) {
    validate_idn(m.idn);
    validate_vae(m.vae);
    if (!m.vae.all_frozen())
        throw TrainError("train_tdn: VAE parameters must be frozen before transfer training");
    if (normal_std.cols() != m.idn.dim())
        throw ShapeError("train_tdn: data dimension does not match the IDN");

    ModelBundle vae_bundle;
    vae_bundle.role = "vae";
    vae_bundle.networks = {{"trunk", m.vae.trunk},
                           {"mean_head", m.vae.mean_head},
                           {"logvar_head", m.vae.logvar_head},
                           {"decoder", m.vae.decoder}};
    const std::uint64_t vae_checksum_before = model_checksum(vae_bundle);

    RmsPropConfig opt{hyper.learning_rate, 0.9, 1e-8};
    OptimizerState st = make_optimizer_state(m.idn.core);
    RngStream fault_rng(hyper.seed, "tdn.faults");
    RngStream noise(hyper.seed, "tdn.noise");
    RngStream shuffle(hyper.seed, "tdn.shuffle");

    std::vector<TdnBatchLoss> trace;
    std::vector<std::size_t> order(normal_std.rows());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fresh random faults every epoch, never reused.
        Matrix faults = sampler.generate(normal_std, fault_rng);
        std::shuffle(order.begin(), order.end(), shuffle.engine());

        int batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t count = std::min(hyper.batch_size, order.size() - start);
            Matrix bn(count, normal_std.cols());
            Matrix bf(count, normal_std.cols());
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t r = order[start + i];
                for (std::size_t j = 0; j < normal_std.cols(); ++j) {
                    bn(i, j) = normal_std(r, j);
                    bf(i, j) = normal_std(r, j) + faults(r, j);
                }
            }
            TdnForward fwd = tdn_forward(m, bn, bf, noise);
            TdnLoss loss = tdn_loss(m, fwd, hyper.lambda_tl);
            if (!std::isfinite(loss.total))
                throw TrainError("tdn training diverged at epoch " + std::to_string(epoch + 1));
            NetworkGrads grads = tdn_backward(m, bn, bf, fwd, hyper.lambda_tl);
            rmsprop_step(m.idn.core, grads, st, opt);
            trace.push_back(
                {epoch + 1, ++batch_index, loss.jv_n, loss.jv_f, loss.jmmd, loss.total});
        }
    }

    vae_bundle.networks = {{"trunk", m.vae.trunk},
                           {"mean_head", m.vae.mean_head},
                           {"logvar_head", m.vae.logvar_head},
                           {"decoder", m.vae.decoder}};
    if (model_checksum(vae_bundle) != vae_checksum_before)
        throw TrainError("train_tdn: frozen VAE parameters changed during transfer training");
    return trace;
}

} // namespace tdn
