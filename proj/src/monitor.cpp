#include "tdn/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tdn/errors.hpp"

namespace tdn {

Matrix residuals(const TdnModel& m, const Matrix& z_std) {
    // Unscaled input inflates every column at once; a fault inflates one or
    // two. Warn only on the former.
    const auto mu = column_means(z_std);
    const auto sd = column_stddevs(z_std, mu);
    std::size_t wide = 0;
    for (double s : sd) wide += (s > 5.0);
    if (wide > sd.size() / 2)
        std::fprintf(stderr,
                     "[tdn] warning: %zu of %zu residual-input columns have std > 5; "
                     "expected standardized data\n",
                     wide, sd.size());
    return idn_forward(m.idn, z_std);
}

namespace {

/// Inverse of a symmetric positive definite matrix via Cholesky.
Matrix spd_inverse(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw NumericError("covariance not positive definite after ridge");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    // Solve L L^T X = I column by column.
    Matrix inv(n, n);
    std::vector<double> y(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = (i == col) ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = y[i];
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * inv(k, col);
            inv(i, col) = s / l(i, i);
        }
    }
    return inv;
}

} // namespace

ResidualStats fit_stats(const Matrix& phi) {
    const std::size_t n = phi.rows(), m = phi.cols();
    if (n < 10 * m)
        throw DataError("fit_stats: need at least 10*m rows, got " + std::to_string(n));
    ResidualStats st;
    st.mean = column_means(phi);
    st.covariance = Matrix(m, m);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            const double di = phi(k, i) - st.mean[i];
            for (std::size_t j = i; j < m; ++j)
                st.covariance(i, j) += di * (phi(k, j) - st.mean[j]);
        }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            st.covariance(i, j) /= static_cast<double>(n);
            st.covariance(j, i) = st.covariance(i, j);
        }
        trace += st.covariance(i, i);
    }
    st.ridge = 1e-6 * trace / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) st.covariance(i, i) += st.ridge;
    st.inverse = spd_inverse(st.covariance);
    return st;
}

double t2_statistic(const ResidualStats& stats, std::span<const double> phi) {
    const std::size_t m = stats.mean.size();
    if (phi.size() != m) throw ShapeError("t2_statistic: residual dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double di = phi[i] - stats.mean[i];
        for (std::size_t j = 0; j < m; ++j)
            acc += di * stats.inverse(i, j) * (phi[j] - stats.mean[j]);
    }
    return acc;
}

std::vector<double> t2_batch(const ResidualStats& stats, const Matrix& phi) {
    std::vector<double> out(phi.rows());
    for (std::size_t k = 0; k < phi.rows(); ++k)
        out[k] = t2_statistic(stats, phi.row_span(k));
    return out;
}

Threshold learn_threshold(const std::vector<double>& t2_values, double expected_far) {
    const std::size_t n = t2_values.size();
    if (n < 1000) throw DataError("learn_threshold: need at least 1000 training statistics");
    if (expected_far <= 0.0 || expected_far >= 1.0)
        throw ConfigError("learn_threshold: expected_far must be in (0, 1)");

    double mean = 0.0;
    for (double v : t2_values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : t2_values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    const double sigma = std::sqrt(var);
    if (sigma <= 0.0) throw NumericError("learn_threshold: degenerate statistics (zero spread)");

    const double h = 1.06 * sigma * std::pow(static_cast<double>(n), -0.2);

    std::vector<double> sorted(t2_values);
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front() - 4.0 * h;
    const double hi = sorted.back() + 4.0 * h;
    constexpr std::size_t kGrid = 4096;
    const double dx = (hi - lo) / static_cast<double>(kGrid - 1);

    // Gaussian kernel, truncated where it underflows to nothing (12 h).
    const double inv_h = 1.0 / h;
    const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * 3.14159265358979323846));
    std::vector<double> pdf(kGrid, 0.0);
    for (std::size_t g = 0; g < kGrid; ++g) {
        const double x = lo + dx * static_cast<double>(g);
        const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - 12.0 * h);
        const auto last = std::upper_bound(first, sorted.end(), x + 12.0 * h);
        double acc = 0.0;
        for (auto it = first; it != last; ++it) {
            const double u = (x - *it) * inv_h;
            acc += std::exp(-0.5 * u * u);
        }
        pdf[g] = acc * norm;
    }

    const double target = 1.0 - expected_far;
    double cdf = 0.0;
    Threshold th;
    th.confidence = target;
    th.bandwidth = h;
    th.n_train = n;
    th.j_th = hi;
    for (std::size_t g = 1; g < kGrid; ++g) {
        cdf += 0.5 * (pdf[g - 1] + pdf[g]) * dx;
        if (cdf >= target) {
            th.j_th = lo + dx * static_cast<double>(g);
            return th;
        }
    }
    return th;  // numerically the CDF fell a hair short of 1; use the grid end
}

Matrix estimate_fault(const TdnModel& m, const Matrix& z_std) {
    Matrix delta = idn_forward(m.idn, z_std);
    for (double& v : delta.data()) v = -v;
    return delta;
}

Matrix estimate_fault_physical(const TdnModel& m, const Matrix& z_std) {
    Matrix f = estimate_fault(m, z_std);
    if (f.cols() != m.scaler.dim())
        throw ShapeError("estimate_fault_physical: scaler dimension mismatch");
    for (std::size_t k = 0; k < f.rows(); ++k)
        for (std::size_t j = 0; j < f.cols(); ++j) f(k, j) *= m.scaler.std[j];
    return f;
}

FaultScore score_fault(const std::string& fault_id, const std::vector<int>& predictions,
                       const std::vector<int>& labels, const Matrix& f_est,
                       const Matrix& f_true, bool additive) {
    if (predictions.size() != labels.size())
        throw ShapeError("score_fault: prediction/label length mismatch");
    if (additive && (!f_est.same_shape(f_true) || f_est.rows() != labels.size()))
        throw ShapeError("score_fault: fault series shape mismatch");

    FaultScore s;
    s.fault_id = fault_id;
    s.additive = additive;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] == 0)
            predictions[k] ? ++s.n_fa : ++s.n_rd;
        else
            predictions[k] ? ++s.n_ta : ++s.n_md;
    }
    s.far = (s.n_fa + s.n_rd) ? static_cast<double>(s.n_fa) / (s.n_fa + s.n_rd) : 0.0;
    s.mdr = (s.n_md + s.n_ta) ? static_cast<double>(s.n_md) / (s.n_md + s.n_ta) : 0.0;

    if (additive) {
        double acc = 0.0;
        for (std::size_t k = 0; k < f_est.rows(); ++k) {
            for (std::size_t j = 0; j < f_est.cols(); ++j) {
                const double d = f_est(k, j) - f_true(k, j);
                acc += d * d;
            }
        }
        s.rmse = std::sqrt(acc / static_cast<double>(f_est.rows()));
    }
    return s;
}

DetectionReport make_report(std::vector<FaultScore> scores, double j_th, std::uint64_t seed) {
    DetectionReport r;
    r.per_fault = std::move(scores);
    r.j_th = j_th;
    r.seed = seed;
    double far = 0.0, mdr = 0.0, rmse = 0.0;
    std::size_t n_additive = 0;
    for (const auto& s : r.per_fault) {
        far += s.far;
        mdr += s.mdr;
        if (s.additive) {
            rmse += s.rmse;
            ++n_additive;
        }
    }
    if (!r.per_fault.empty()) {
        r.afar = far / static_cast<double>(r.per_fault.size());
        r.amdr = mdr / static_cast<double>(r.per_fault.size());
    }
    if (n_additive) r.armse = rmse / static_cast<double>(n_additive);
    return r;
}

} // namespace tdn
