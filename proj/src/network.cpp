#include "tdn/network.hpp"

#include <cmath>
#include <string>

namespace tdn {

void validate_network(const Network& net) {
    if (net.spec.empty()) throw ConfigError("network has no layers");
    if (net.spec.size() != net.params.size())
        throw ConfigError("network spec/params layer count mismatch");
    for (std::size_t l = 0; l < net.spec.size(); ++l) {
        const auto& s = net.spec[l];
        if (s.in_dim == 0 || s.out_dim == 0)
            throw ConfigError("layer " + std::to_string(l) + " has zero dimension");
        if (l > 0 && net.spec[l - 1].out_dim != s.in_dim)
            throw ConfigError("layer " + std::to_string(l) + " in_dim " +
                              std::to_string(s.in_dim) + " does not chain from previous out_dim " +
                              std::to_string(net.spec[l - 1].out_dim));
        const auto& p = net.params[l];
        if (p.weight.rows() != s.out_dim || p.weight.cols() != s.in_dim ||
            p.bias.size() != s.out_dim)
            throw ConfigError("layer " + std::to_string(l) + " parameter shape mismatch");
        if (!p.weight.all_finite())
            throw NumericError("layer " + std::to_string(l) + " has non-finite weights");
        for (double b : p.bias)
            if (!std::isfinite(b))
                throw NumericError("layer " + std::to_string(l) + " has non-finite bias");
    }
}

Network make_network(const std::vector<LayerSpec>& layers, RngStream& rng) {
    Network net;
    net.spec = layers;
    net.params.reserve(layers.size());
    for (const auto& s : layers) {
        DenseParams p;
        p.weight = Matrix(s.out_dim, s.in_dim);
        const double bound = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
        for (double& w : p.weight.data()) w = rng.uniform(-bound, bound);
        p.bias.assign(s.out_dim, 0.0);
        net.params.push_back(std::move(p));
    }
    validate_network(net);
    return net;
}

Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache) {
    if (net.spec.empty()) throw ConfigError("forward on empty network");
    if (batch.cols() != net.in_dim())
        throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                         " columns, network expects " + std::to_string(net.in_dim()));
    if (cache) {
        cache->input = batch;
        cache->pre.clear();
        cache->act.clear();
        cache->pre.reserve(net.num_layers());
        cache->act.reserve(net.num_layers());
    }

    Matrix cur = batch;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const auto& p = net.params[l];
        Matrix pre = matmul_nt(cur, p.weight);
        for (std::size_t i = 0; i < pre.rows(); ++i) {
            double* ri = pre.row(i);
            for (std::size_t j = 0; j < pre.cols(); ++j) ri[j] += p.bias[j];
        }
        Matrix act(pre.rows(), pre.cols());
        const Activation kind = net.spec[l].activation;
        for (std::size_t i = 0; i < pre.data().size(); ++i)
            act.data()[i] = activate(kind, pre.data()[i]);
        if (!act.all_finite())
            throw NumericError("non-finite output in layer " + std::to_string(l) + " (" +
                               activation_name(kind) + ")");
        if (cache) {
            cache->pre.push_back(pre);
            cache->act.push_back(act);
        }
        cur = std::move(act);
    }
    return cur;
}

NetworkGrads zero_grads(const Network& net) {
    NetworkGrads g;
    g.weight.reserve(net.num_layers());
    g.bias.reserve(net.num_layers());
    for (const auto& s : net.spec) {
        g.weight.emplace_back(s.out_dim, s.in_dim);
        g.bias.emplace_back(s.out_dim, 0.0);
    }
    return g;
}

Matrix backward(const Network& net, const ForwardCache& cache, const Matrix& upstream,
                NetworkGrads& grads) {
    const std::size_t L = net.num_layers();
    if (cache.pre.size() != L || cache.act.size() != L)
        throw ShapeError("backward: cache does not match network depth");
    if (!upstream.same_shape(cache.act.back()))
        throw ShapeError("backward: upstream gradient shape mismatch");
    if (grads.weight.size() != L)
        throw ShapeError("backward: gradient accumulator layer count mismatch");

    Matrix g = upstream;
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& pre = cache.pre[l];
        const Activation kind = net.spec[l].activation;
        // dJ/d pre = dJ/d act * A'(pre)
        Matrix d(pre.rows(), pre.cols());
        for (std::size_t i = 0; i < pre.data().size(); ++i)
            d.data()[i] = g.data()[i] * activate_deriv(kind, pre.data()[i]);

        const Matrix& below = (l == 0) ? cache.input : cache.act[l - 1];
        Matrix dw = matmul_tn(d, below);
        for (std::size_t i = 0; i < dw.data().size(); ++i)
            grads.weight[l].data()[i] += dw.data()[i];
        for (std::size_t i = 0; i < d.rows(); ++i) {
            const double* ri = d.row(i);
            for (std::size_t j = 0; j < d.cols(); ++j) grads.bias[l][j] += ri[j];
        }
        g = matmul_nn(d, net.params[l].weight);
    }
    return g;
}

} // namespace tdn
