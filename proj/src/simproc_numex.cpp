#include <cmath>

#include "tdn/errors.hpp"
#include "tdn/simproc.hpp"

namespace tdn {

namespace {
constexpr double kPi = 3.14159265358979323846;
} // namespace

std::array<double, 5> numex_emit(const NumexParams& p, const NumexState& s,
                                 const std::array<double, 5>& noise) {
    const double x1 = s.x1, x2 = s.x2;
    double den = std::sqrt(x1 * x1 + x2 * x2);
    if (den < p.denom_floor) den = p.denom_floor;
    std::array<double, 5> z;
    z[0] = 0.1 * x1 + x1 / den + noise[0];
    z[1] = 0.1 * x1 * x2 + x2 / den + noise[1];
    z[2] = std::pow(std::cos(x1), 3.0) + 0.1 * std::exp(std::sin(x2)) + noise[2];
    z[3] = std::pow(std::sin(x1), 3.0) + std::log(2.0 + std::cos(x2)) + noise[3];
    z[4] = std::sqrt(x1 * x1 + x2 * x2) + 0.1 * x1 * x1 * x1 - 0.1 * x1 * x1 * x1 * x1 +
           std::sin(0.1 * x1 * x2) + noise[4];
    return z;
}

NumexState numex_advance(const NumexState& s, double v1, double v2) {
    NumexState n;
    n.x1 = std::sin(s.x1) + 0.1 * std::exp(std::cos(s.x1)) + v1;
    n.x2 = std::sin(s.x2 + s.x2 * s.x2 + 2.0 * s.x2 * s.x2 * s.x2) + v2;
    return n;
}

std::array<double, 5> NumexSim::step(int fault_id) {
    const bool f1 = fault_id == 1 || fault_id == 3;  // v1 mean shifted to 0.2
    const bool f2 = fault_id == 2 || fault_id == 3;  // x2 recursion gains 0.5*x2 term
    const bool f4 = fault_id == 4;                   // x1 recursion coefficient 0.1 -> 0.3

    const double v1 = rng_.normal(f1 ? 0.2 : 0.0, p_.latent_noise_std[0]);
    const double v2 = rng_.normal(0.0, p_.latent_noise_std[1]);

    NumexState next;
    if (f4)
        next.x1 = std::sin(s_.x1) + 0.3 * std::exp(std::cos(s_.x1)) + v1;
    else
        next.x1 = std::sin(s_.x1) + 0.1 * std::exp(std::cos(s_.x1)) + v1;
    const double u = s_.x2 + s_.x2 * s_.x2 + 2.0 * s_.x2 * s_.x2 * s_.x2;
    if (f2)
        next.x2 = 0.5 * s_.x2 + std::sin(u) + v2;
    else
        next.x2 = std::sin(u) + v2;
    s_ = next;
    ++steps_;
    if (!std::isfinite(s_.x1) || !std::isfinite(s_.x2))
        throw NumericError("numerical-example state diverged at step " +
                           std::to_string(steps_));

    std::array<double, 5> w;
    for (int j = 0; j < 5; ++j) w[j] = rng_.normal(0.0, p_.obs_noise_std[j]);
    return numex_emit(p_, s_, w);
}

double numex_additive_fault(int fault_id, std::size_t k, std::size_t onset, int& channel) {
    channel = -1;
    if (k < onset) return 0.0;
    // Time functions are anchored so that the first faulty sample sees t = 1.
    const std::size_t steps = k - onset + 1;
    const double t = static_cast<double>(steps);
    switch (fault_id) {
        case 5: channel = 0; return 0.0018 * t;
        case 6: channel = 1; return 0.005 * t;
        case 7: channel = 2; return std::fabs(0.4 * std::sin(2.0 * kPi * t / 300.0 + kPi / 22.0));
        case 8: channel = 3; return 0.009 * t;
        case 9: {
            channel = 3;
            const double tm = static_cast<double>(steps % 300);
            return 1.8 * std::sin(kPi * tm / 600.0 + kPi / 33.0);
        }
        case 10: channel = 4; return -0.01 * t;
        default: return 0.0;
    }
}

namespace {

Dataset run_numex(const std::string& scenario, int fault_id, std::size_t n_normal,
                  std::size_t n_faulty, std::uint64_t seed) {
    NumexParams params;
    NumexSim sim(params, RngStream(seed, "sim." + scenario));
    for (std::size_t i = 0; i < params.burn_in; ++i) sim.step(0);

    const std::size_t n = n_normal + n_faulty;
    Dataset ds;
    ds.scenario = scenario;
    ds.fault_id = fault_id == 0 ? "normal"
                                : "F" + std::string(fault_id < 10 ? "0" : "") +
                                      std::to_string(fault_id);
    ds.seed = seed;
    ds.onset = n_faulty == 0 ? 0 : n_normal;
    ds.additive_truth = fault_id >= 5;
    ds.z = Matrix(n, 5);
    ds.fault_truth = Matrix(n, 5);
    ds.labels.assign(n, 0);

    const bool latent_fault = fault_id >= 1 && fault_id <= 4;
    for (std::size_t k = 0; k < n; ++k) {
        const bool faulty = n_faulty > 0 && k >= ds.onset;
        const int dyn_fault = (faulty && latent_fault) ? fault_id : 0;
        auto z = sim.step(dyn_fault);
        if (faulty && fault_id >= 5) {
            int channel = -1;
            const double f = numex_additive_fault(fault_id, k, ds.onset, channel);
            if (channel >= 0) {
                z[static_cast<std::size_t>(channel)] += f;
                ds.fault_truth(k, static_cast<std::size_t>(channel)) = f;
            }
        }
        for (std::size_t j = 0; j < 5; ++j) ds.z(k, j) = z[j];
        ds.labels[k] = faulty ? 1 : 0;
    }
    return ds;
}

} // namespace

Dataset gen_numex_train(std::size_t n_samples, std::uint64_t seed) {
    return run_numex("numex-train", 0, n_samples, 0, seed);
}

Dataset gen_numex_test(int fault_id, std::size_t n_normal, std::size_t n_faulty,
                       std::uint64_t seed) {
    if (fault_id < 1 || fault_id > 10)
        throw ConfigError("unknown numerical-example fault id " + std::to_string(fault_id));
    if (n_normal == 0 || n_faulty == 0)
        throw ConfigError("numex test sets need a normal prefix and a faulty tail");
    std::string name = "numex-test-F";
    if (fault_id < 10) name += "0";
    name += std::to_string(fault_id);
    return run_numex(name, fault_id, n_normal, n_faulty, seed);
}

} // namespace tdn
