// Test-only oracles, independent of the library's forward/backward paths:
// an explicit per-sample loop network evaluator, a central finite-difference
// gradient checker, and a Jacobi eigensolver for PCA baselines.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tdn/network.hpp"
#include "tdn/rng.hpp"

namespace oracle {

/// Forward pass written as naive per-sample loops; shares nothing with
/// tdn::forward except the activation definitions.
inline std::vector<double> loop_forward_row(const tdn::Network& net,
                                            const std::vector<double>& row) {
    std::vector<double> cur = row;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const auto& p = net.params[l];
        std::vector<double> next(net.spec[l].out_dim, 0.0);
        for (std::size_t o = 0; o < net.spec[l].out_dim; ++o) {
            double acc = p.bias[o];
            for (std::size_t i = 0; i < net.spec[l].in_dim; ++i) acc += p.weight(o, i) * cur[i];
            next[o] = tdn::activate(net.spec[l].activation, acc);
        }
        cur = std::move(next);
    }
    return cur;
}

/// Addresses of every parameter scalar of a network, in a fixed order.
inline std::vector<double*> param_refs(tdn::Network& net) {
    std::vector<double*> refs;
    for (auto& p : net.params) {
        for (double& w : p.weight.data()) refs.push_back(&w);
        for (double& b : p.bias) refs.push_back(&b);
    }
    return refs;
}

/// Flatten NetworkGrads in the same order as param_refs.
inline std::vector<double> flat_grads(const tdn::NetworkGrads& g) {
    std::vector<double> out;
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
        out.insert(out.end(), g.weight[l].data().begin(), g.weight[l].data().end());
        out.insert(out.end(), g.bias[l].begin(), g.bias[l].end());
    }
    return out;
}

struct FdResult {
    double max_rel_err = 0.0;
    std::size_t probes = 0;
};

/// Central-difference check of `analytic` against the scalar `loss` at up to
/// `max_probes` randomly chosen parameters. Relative error uses
/// |num - ana| / max(1, |num|, |ana|).
inline FdResult fd_check(std::vector<double*> params, const std::vector<double>& analytic,
                         const std::function<double()>& loss, double step,
                         std::size_t max_probes, tdn::RngStream& rng) {
    FdResult res;
    const std::size_t n = params.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (max_probes < n) {
        for (std::size_t i = 0; i < max_probes; ++i)
            std::swap(idx[i], idx[i + rng.index(n - i)]);
        idx.resize(max_probes);
    }
    for (std::size_t i : idx) {
        const double orig = *params[i];
        *params[i] = orig + step;
        const double up = loss();
        *params[i] = orig - step;
        const double down = loss();
        *params[i] = orig;
        const double num = (up - down) / (2.0 * step);
        const double ana = analytic[i];
        const double denom = std::max({1.0, std::fabs(num), std::fabs(ana)});
        res.max_rel_err = std::max(res.max_rel_err, std::fabs(num - ana) / denom);
        ++res.probes;
    }
    return res;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (ascending).
inline std::vector<double> symmetric_eigenvalues(tdn::Matrix a) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline tdn::Matrix random_matrix(std::size_t r, std::size_t c, tdn::RngStream& rng,
                                 double scale = 1.0) {
    tdn::Matrix m(r, c);
    for (double& v : m.data()) v = rng.normal(0.0, scale);
    return m;
}

} // namespace oracle
