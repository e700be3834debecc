#include "tdn/idn.hpp"

#include "tdn/errors.hpp"

namespace tdn {

void validate_idn(const IdnModel& m) {
    validate_network(m.core);
    if (m.core.in_dim() != m.core.out_dim())
        throw ConfigError("idn core must be square (in_dim == out_dim)");
}

Matrix diagonalize(const Matrix& batch) {
    const std::size_t n = batch.rows(), m = batch.cols();
    Matrix rows(n * m, m);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < m; ++j) rows(k * m + j, j) = batch(k, j);
    return rows;
}

Matrix idn_forward(const IdnModel& model, const Matrix& batch, IdnCache* cache) {
    if (batch.cols() != model.dim())
        throw ShapeError("idn_forward: batch has " + std::to_string(batch.cols()) +
                         " columns, core expects " + std::to_string(model.dim()));
    const std::size_t n = batch.rows(), m = batch.cols();
    IdnCache local;
    IdnCache& c = cache ? *cache : local;
    c.n = n;
    c.m = m;
    Matrix rows_out = forward(model.core, diagonalize(batch), &c.core);
    Matrix delta(n, m);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < m; ++j) delta(k, j) = rows_out(k * m + j, j);
    return delta;
}

Matrix idn_backward(const IdnModel& model, const IdnCache& cache, const Matrix& upstream,
                    NetworkGrads& grads) {
    const std::size_t n = cache.n, m = cache.m;
    if (upstream.rows() != n || upstream.cols() != m)
        throw ShapeError("idn_backward: upstream gradient shape mismatch");
    // Non-diagonal outputs were dropped by the extraction, so their upstream
    // gradient is exactly zero.
    Matrix rows_grad(n * m, m);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < m; ++j) rows_grad(k * m + j, j) = upstream(k, j);
    Matrix rows_input_grad = backward(model.core, cache.core, rows_grad, grads);
    Matrix dz(n, m);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < m; ++j) dz(k, j) = rows_input_grad(k * m + j, j);
    return dz;
}

} // namespace tdn
