#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tdn/errors.hpp"
#include "tdn/simproc.hpp"

namespace tdn {

namespace {

double signum(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double torricelli(double coeff, double area, double gravity, double head) {
    // coeff * area * sign(head) * sqrt(2 g |head|)
    return coeff * area * signum(head) * std::sqrt(2.0 * gravity * std::fabs(head));
}

} // namespace

TtsDerivatives tts_derivatives(const TtsParams& p, const TtsState& s, double q1, double q2,
                               const TtsFaults& f) {
    TtsDerivatives d{};
    d.q13 = torricelli(p.a1, p.pipe_area, p.gravity, s.h1 - s.h3);
    d.q32 = torricelli(p.a3, p.pipe_area, p.gravity, s.h3 - s.h2);
    d.q20 = p.a2 * p.pipe_area * std::sqrt(2.0 * p.gravity * std::max(s.h2, 0.0));
    // Pipe 1->3 blockage perturbs the connecting flow.
    d.q13 += f.f8 * torricelli(p.a1, p.pipe_area, p.gravity, s.h1 - s.h3);

    d.dh1 = (q1 - d.q13) / p.tank_area;
    d.dh2 = (q2 + d.q32 - d.q20) / p.tank_area;
    d.dh3 = (d.q13 - d.q32) / p.tank_area;

    // Tank leaks enter the level derivatives directly.
    d.dh1 -= p.a1 * p.pipe_area * f.f5 * std::sqrt(2.0 * p.gravity * std::max(s.h1, 0.0));
    d.dh2 -= p.a2 * p.pipe_area * f.f6 * std::sqrt(2.0 * p.gravity * std::max(s.h2, 0.0));
    d.dh3 -= p.a3 * p.pipe_area * f.f7 * std::sqrt(2.0 * p.gravity * std::max(s.h3, 0.0));
    return d;
}

std::array<double, 5> TtsSim::step(const TtsFaults& faults) {
    q1_ += rng_.uniform(-p_.q_walk_step, p_.q_walk_step);
    q2_ += rng_.uniform(-p_.q_walk_step, p_.q_walk_step);
    // Reflect the commanded flows back into their operating band.
    for (double* q : {&q1_, &q2_}) {
        if (*q < p_.q_min) *q = 2.0 * p_.q_min - *q;
        if (*q > p_.q_max) *q = 2.0 * p_.q_max - *q;
    }

    const TtsDerivatives d = tts_derivatives(p_, s_, q1_, q2_, faults);

    auto integrate = [&](double h, double dh) {
        double next = h + p_.dt * dh;
        if (next < 0.0 || next > p_.h_max) {
            ++clamp_events_;
            next = std::clamp(next, 0.0, p_.h_max);
        }
        return next;
    };
    s_.h1 = integrate(s_.h1, d.dh1);
    s_.h2 = integrate(s_.h2, d.dh2);
    s_.h3 = integrate(s_.h3, d.dh3);
    ++steps_;
    if (!std::isfinite(s_.h1) || !std::isfinite(s_.h2) || !std::isfinite(s_.h3))
        throw NumericError("three-tank state diverged at step " + std::to_string(steps_));

    return {q1_, q2_, s_.h1, s_.h2, s_.h3};
}

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Fault description for one TTS test run at 0-based sample index k.
/// Faults 1..4 are sensor faults: they corrupt the recorded signals only
/// (flows for 1-2, levels for 3-4) and never enter the dynamics. Faults
/// 5..8 are component faults (tank leaks, pipe blockage) acting on the
/// dynamics with no additive observation-space truth.
struct TtsFaultInstant {
    double sensor[4] = {0, 0, 0, 0};  // additive on recorded [Q1 Q2 h1 h2]
    TtsFaults component;
};

TtsFaultInstant tts_fault_at(int fault_id, std::size_t k, std::size_t onset) {
    TtsFaultInstant f;
    if (k < onset) return f;
    const double t = static_cast<double>(k - onset);  // first faulty sample sees t = 0
    switch (fault_id) {
        case 1: {
            const double kk = static_cast<double>(k);
            const double square =
                3.0 * (1.0 - std::floor(kk / 64.0 - 1.25 * std::floor(kk / 80.0)));
            f.sensor[0] = 0.005 * t + square;
            f.sensor[1] = f.sensor[0];
            break;
        }
        case 2: f.sensor[0] = -20.0; break;
        case 3: f.sensor[2] = -0.005 * t; break;
        case 4: f.sensor[3] = 0.0003 * t + 0.0006 * std::sin(t / (2.0 * kPi)); break;
        case 5: f.component.f5 = 0.005 * t; break;
        case 6: f.component.f6 = -0.0004 * t; break;
        case 7: f.component.f7 = -0.0004 * t; break;
        case 8: f.component.f8 = -0.5; break;
        default: break;
    }
    return f;
}

Dataset run_tts(const std::string& scenario, int fault_id, std::size_t n_normal,
                std::size_t n_faulty, std::uint64_t seed) {
    TtsParams params;
    TtsSim sim(params, RngStream(seed, "sim." + scenario));
    for (std::size_t i = 0; i < params.burn_in; ++i) sim.step();

    const std::size_t n = n_normal + n_faulty;
    Dataset ds;
    ds.scenario = scenario;
    ds.fault_id = fault_id == 0 ? "normal"
                                : "F" + std::string(fault_id < 10 ? "0" : "") +
                                      std::to_string(fault_id);
    ds.seed = seed;
    ds.onset = n_faulty == 0 ? 0 : n_normal;
    ds.additive_truth = fault_id >= 1 && fault_id <= 4;
    ds.z = Matrix(n, 5);
    ds.fault_truth = Matrix(n, 5);
    ds.labels.assign(n, 0);

    for (std::size_t k = 0; k < n; ++k) {
        const bool faulty = n_faulty > 0 && k >= ds.onset;
        const TtsFaultInstant f =
            faulty ? tts_fault_at(fault_id, k, ds.onset) : TtsFaultInstant{};
        auto z = sim.step(f.component);
        // Sensor faults corrupt the recorded signals after integration.
        for (std::size_t j = 0; j < 4; ++j) z[j] += f.sensor[j];
        for (std::size_t j = 0; j < 5; ++j) ds.z(k, j) = z[j];
        ds.labels[k] = faulty ? 1 : 0;
        if (ds.additive_truth && faulty)
            for (std::size_t j = 0; j < 4; ++j) ds.fault_truth(k, j) = f.sensor[j];
    }
    if (sim.clamp_events() > sim.steps() / 2)
        std::fprintf(stderr, "[tdn] warning: %s: levels clamped on %zu of %zu steps\n",
                     scenario.c_str(), sim.clamp_events(), sim.steps());
    return ds;
}

} // namespace

Dataset gen_tts_train(std::size_t n_samples, std::uint64_t seed) {
    return run_tts("tts-train", 0, n_samples, 0, seed);
}

Dataset gen_tts_test(int fault_id, std::size_t n_normal, std::size_t n_faulty,
                     std::uint64_t seed) {
    if (fault_id < 1 || fault_id > 8)
        throw ConfigError("unknown TTS fault id " + std::to_string(fault_id));
    if (n_normal == 0 || n_faulty == 0)
        throw ConfigError("TTS test sets need a normal prefix and a faulty tail");
    std::string name = "tts-test-F0" + std::to_string(fault_id);
    return run_tts(name, fault_id, n_normal, n_faulty, seed);
}

Dataset gen_dataset(const ScenarioSpec& spec, std::uint64_t seed) {
    const std::string& s = spec.name;
    auto fault_from = [&](const std::string& prefix) {
        return std::stoi(s.substr(prefix.size() + 1));  // skip the 'F'
    };
    if (s == "numex-train") return gen_numex_train(spec.train_samples, seed);
    if (s == "tts-train") return gen_tts_train(spec.train_samples, seed);
    if (s.rfind("numex-test-", 0) == 0)
        return gen_numex_test(fault_from("numex-test-"), spec.test_normal, spec.test_faulty,
                              seed);
    if (s.rfind("tts-test-", 0) == 0)
        return gen_tts_test(fault_from("tts-test-"), spec.test_normal, spec.test_faulty, seed);
    throw ConfigError("unknown scenario: " + s);
}

std::vector<std::string> scenario_names(const std::string& system) {
    std::vector<std::string> names;
    if (system == "numex") {
        names.push_back("numex-train");
        for (int f = 1; f <= 10; ++f)
            names.push_back("numex-test-F" + std::string(f < 10 ? "0" : "") + std::to_string(f));
    } else if (system == "tts") {
        names.push_back("tts-train");
        for (int f = 1; f <= 8; ++f) names.push_back("tts-test-F0" + std::to_string(f));
    } else {
        throw ConfigError("unknown system: " + system);
    }
    return names;
}

} // namespace tdn
