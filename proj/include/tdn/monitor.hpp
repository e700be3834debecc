#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tdn/tdn.hpp"

namespace tdn {

/// Residual statistics on normal data: centering mean, ridge-regularized
/// covariance and its precomputed inverse.
struct ResidualStats {
    std::vector<double> mean;
    Matrix covariance;  // includes the ridge
    Matrix inverse;
    double ridge = 0.0;
};

/// phi(z) = D(z): rows of IDN outputs for standardized observations. Prints
/// a warning (once per call) if the input does not look standardized.
Matrix residuals(const TdnModel& m, const Matrix& z_std);

/// Covariance of centered residuals with a ridge of 1e-6 * trace/m on the
/// diagonal; requires at least 10*m rows.
ResidualStats fit_stats(const Matrix& phi);

double t2_statistic(const ResidualStats& stats, std::span<const double> phi);
std::vector<double> t2_batch(const ResidualStats& stats, const Matrix& phi);

struct Threshold {
    double j_th = 0.0;
    double confidence = 0.995;  // 1 - expected FAR
    double bandwidth = 0.0;
    std::size_t n_train = 0;
};

/// Gaussian-kernel KDE over training T^2 values with the rule-of-thumb
/// bandwidth h = 1.06 * sigma * N^{-0.2}. J_th is the smallest grid point
/// whose trapezoid CDF reaches 1 - expected_far (grid: [min-4h, max+4h],
/// 4096 points).
Threshold learn_threshold(const std::vector<double>& t2_values, double expected_far = 0.005);

/// Faulty iff T^2 > J_th; ties count as normal.
inline bool classify_faulty(const Threshold& th, double t2) { return t2 > th.j_th; }

/// f_tilde = -D(z), standardized units.
Matrix estimate_fault(const TdnModel& m, const Matrix& z_std);

/// Same estimate mapped back to physical units via the scaler stds.
Matrix estimate_fault_physical(const TdnModel& m, const Matrix& z_std);

struct FaultScore {
    std::string fault_id;
    std::size_t n_fa = 0, n_ta = 0, n_md = 0, n_rd = 0;
    double far = 0.0;   // FA / (FA + RD), over labeled-normal samples
    double mdr = 0.0;   // MD / (MD + TA), over labeled-faulty samples
    double rmse = 0.0;  // sqrt(mean ||f_est - f_true||^2), additive faults only
    bool additive = false;
};

FaultScore score_fault(const std::string& fault_id, const std::vector<int>& predictions,
                       const std::vector<int>& labels, const Matrix& f_est,
                       const Matrix& f_true, bool additive);

struct DetectionReport {
    std::vector<FaultScore> per_fault;
    double afar = 0.0;
    double amdr = 0.0;
    double armse = 0.0;  // over additive faults only
    double j_th = 0.0;
    std::uint64_t seed = 0;
};

DetectionReport make_report(std::vector<FaultScore> scores, double j_th, std::uint64_t seed);

} // namespace tdn
