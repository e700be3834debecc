#pragma once

#include "tdn/network.hpp"

namespace tdn {

/// Input-output decoupled network. Every sample z is diagonalized into m_z
/// one-hot-masked rows which share one core FCNN; only the j-th output of
/// the j-th row is kept, so residual variable j depends on input variable j
/// alone, by construction.
struct IdnModel {
    Network core;  // in_dim == out_dim == m_z

    std::size_t dim() const { return core.in_dim(); }
};

void validate_idn(const IdnModel& m);

/// N x m batch -> (N*m) x m rows; row (k, j) holds z(k, j) at position j and
/// exact zeros elsewhere.
Matrix diagonalize(const Matrix& batch);

struct IdnCache {
    ForwardCache core;
    std::size_t n = 0;
    std::size_t m = 0;
};

/// delta(k, j) = core(z_j^-)(j): the decoupled output, one value per
/// (sample, variable). The rows are flattened into one core forward pass;
/// the result is identical to processing them one at a time. Diagonal
/// extraction is the only implemented aggregation; other row reductions
/// (e.g. the row mean) would slot in here.
Matrix idn_forward(const IdnModel& m, const Matrix& batch, IdnCache* cache = nullptr);

/// Backprop dJ/d delta into core parameter gradients. Gradient for row
/// (k, j) flows only through output coordinate j. Returns dJ/dz.
Matrix idn_backward(const IdnModel& m, const IdnCache& cache, const Matrix& upstream,
                    NetworkGrads& grads);

} // namespace tdn
