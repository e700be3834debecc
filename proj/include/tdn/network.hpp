#pragma once

#include <cstddef>
#include <vector>

#include "tdn/activations.hpp"
#include "tdn/matrix.hpp"
#include "tdn/rng.hpp"

namespace tdn {

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::Affine;
};

struct DenseParams {
    Matrix weight;             // out_dim x in_dim
    std::vector<double> bias;  // out_dim
    bool frozen = false;
};

/// A plain fully connected network: alternating linear and activation maps.
/// Forward/backward are hand-written; there is no general autodiff here.
struct Network {
    std::vector<LayerSpec> spec;
    std::vector<DenseParams> params;

    std::size_t num_layers() const { return spec.size(); }
    std::size_t in_dim() const { return spec.empty() ? 0 : spec.front().in_dim; }
    std::size_t out_dim() const { return spec.empty() ? 0 : spec.back().out_dim; }

    void set_frozen(bool frozen) {
        for (auto& p : params) p.frozen = frozen;
    }
    bool all_frozen() const {
        for (const auto& p : params)
            if (!p.frozen) return false;
        return !params.empty();
    }
};

/// Caches every pre-activation and activation value of one forward pass;
/// exactly what the chain rule needs on the way back.
struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre;  // per layer, batch x out_dim
    std::vector<Matrix> act;  // per layer, batch x out_dim
};

/// Per-layer parameter gradients, same shapes as the network parameters.
struct NetworkGrads {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;

    void add(const NetworkGrads& o) {
        for (std::size_t l = 0; l < weight.size(); ++l) {
            for (std::size_t i = 0; i < weight[l].data().size(); ++i)
                weight[l].data()[i] += o.weight[l].data()[i];
            for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += o.bias[l][i];
        }
    }
};

void validate_network(const Network& net);

/// Glorot-style init: weights uniform in +-sqrt(6/(in+out)), biases zero.
Network make_network(const std::vector<LayerSpec>& layers, RngStream& rng);

/// Row-wise forward pass. `cache`, when given, receives everything backward
/// needs. Throws ShapeError on dimension mismatch and NumericError (naming
/// the layer) if a non-finite value appears.
Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache = nullptr);

NetworkGrads zero_grads(const Network& net);

/// Backpropagates `upstream` (dJ/d output) through the cached pass. Returns
/// dJ/d input; parameter gradients are accumulated into `grads` (which must
/// come from zero_grads or a previous backward over the same network).
Matrix backward(const Network& net, const ForwardCache& cache, const Matrix& upstream,
                NetworkGrads& grads);

} // namespace tdn
