#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tdn/matrix.hpp"
#include "tdn/rng.hpp"

namespace tdn {

/// One generated dataset: observations in physical units, per-sample labels,
/// and the additive fault ground truth in observation space. Faults acting on
/// latent states / component dynamics have no additive observation-space
/// truth; they carry additive_truth = false and are excluded from RMSE.
struct Dataset {
    std::string scenario;
    std::string fault_id;      // "normal" for training data, else "F01".."F10"
    std::uint64_t seed = 0;
    std::size_t onset = 0;     // first faulty index; 0 for pure-normal sets
    bool additive_truth = false;
    Matrix z;                  // N x m_z observations
    std::vector<int> labels;   // 0 normal, 1 faulty
    Matrix fault_truth;        // N x m_z additive fault signal (zeros where none)
};

// ---------------------------------------------------------------------------
// Numerical example: two latent recursions driving five noisy observations.
// ---------------------------------------------------------------------------

struct NumexParams {
    std::array<double, 5> obs_noise_std{0.05, 0.16, 0.02, 0.05, 0.3};
    std::array<double, 2> latent_noise_std{0.01, 0.01};
    double denom_floor = 1e-6;  // guards the 1/sqrt(x1^2+x2^2) singularity
    // The slow latent recursion keeps a memory of the initial condition for
    // well over a thousand steps; shorter burn-ins leak that transient into
    // the recorded data and inflate the false alarm rate on fresh streams.
    std::size_t burn_in = 2000;
};

struct NumexState {
    double x1 = 0.1;
    double x2 = 0.1;
};

/// Emit the five observations from the current latents with the given noise.
std::array<double, 5> numex_emit(const NumexParams& p, const NumexState& s,
                                 const std::array<double, 5>& noise);

/// Advance the latent recursions one step (normal dynamics).
NumexState numex_advance(const NumexState& s, double v1, double v2);

class NumexSim {
public:
    NumexSim(NumexParams params, RngStream rng) : p_(params), rng_(std::move(rng)) {}

    /// Advance latents, then emit observations. `fault_id` 0 means normal;
    /// 1..4 alter the latent dynamics / noise, 5..10 are handled by the
    /// caller as additive observation faults.
    std::array<double, 5> step(int fault_id = 0);

    const NumexState& state() const { return s_; }
    void set_state(const NumexState& s) { s_ = s; }

private:
    NumexParams p_;
    RngStream rng_;
    NumexState s_;
    std::size_t steps_ = 0;
};

/// Additive observation-fault value of numerical faults 5..10 at 0-based
/// sample index k (onset 200); returns the affected channel in `channel`.
double numex_additive_fault(int fault_id, std::size_t k, std::size_t onset, int& channel);

Dataset gen_numex_train(std::size_t n_samples, std::uint64_t seed);
Dataset gen_numex_test(int fault_id, std::size_t n_normal, std::size_t n_faulty,
                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Three-tank system: Torricelli flows, explicit Euler, random-walk excitation.
// ---------------------------------------------------------------------------

struct TtsParams {
    double tank_area = 154.0;   // cm^2
    double pipe_area = 0.5;     // cm^2
    double a1 = 0.46;
    double a2 = 0.60;
    double a3 = 0.45;
    double gravity = 980.0;     // cm/s^2; all lengths are cm
    double h_max = 62.0;        // cm
    double dt = 1.0;            // s
    // Excitation: slow bounded random walk around a nominal flow. The
    // nominal must keep the equilibrium levels inside the tanks (at
    // Q1=Q2=40 the tank-1 equilibrium would sit above h_max), and the band
    // stays narrow so the catalog faults remain large against the normal
    // operating variation.
    double q_nominal = 30.0;    // cm^3/s
    double q_walk_step = 0.05;  // per-step uniform half-width
    double q_min = 29.0;
    double q_max = 31.0;
    std::size_t burn_in = 500;
};

struct TtsState {
    double h1 = 40.0;
    double h2 = 20.0;
    double h3 = 30.0;
};

struct TtsFaults {
    double f5 = 0.0;  // tank 1 leak coefficient
    double f6 = 0.0;  // tank 2 leak coefficient
    double f7 = 0.0;  // tank 3 leak coefficient
    double f8 = 0.0;  // pipe 1->3 blockage coefficient
};

struct TtsDerivatives {
    double dh1, dh2, dh3;
    double q13, q32, q20;
};

TtsDerivatives tts_derivatives(const TtsParams& p, const TtsState& s, double q1, double q2,
                               const TtsFaults& f = {});

class TtsSim {
public:
    TtsSim(TtsParams params, RngStream rng)
        : p_(params), rng_(std::move(rng)), q1_(params.q_nominal), q2_(params.q_nominal) {}

    /// Advance the commanded flows one random-walk step, integrate one Euler
    /// step with the given component faults, and return the physical
    /// observation [Q1 Q2 h1 h2 h3]. Sensor faults corrupt recordings only
    /// and are added by the caller.
    std::array<double, 5> step(const TtsFaults& faults = {});

    const TtsState& state() const { return s_; }
    void set_state(const TtsState& s) { s_ = s; }
    std::size_t clamp_events() const { return clamp_events_; }
    std::size_t steps() const { return steps_; }

private:
    TtsParams p_;
    RngStream rng_;
    TtsState s_;
    double q1_, q2_;
    std::size_t clamp_events_ = 0;
    std::size_t steps_ = 0;
};

Dataset gen_tts_train(std::size_t n_samples, std::uint64_t seed);
Dataset gen_tts_test(int fault_id, std::size_t n_normal, std::size_t n_faulty,
                     std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Scenario dispatch: "numex-train", "numex-test-F07", "tts-train",
/// "tts-test-F03". Sizes follow the case-study defaults unless overridden.
struct ScenarioSpec {
    std::string name;
    std::size_t train_samples = 0;  // used by *-train
    std::size_t test_normal = 200;
    std::size_t test_faulty = 0;    // used by *-test-*
};

Dataset gen_dataset(const ScenarioSpec& spec, std::uint64_t seed);

/// All scenario names for a system ("numex" or "tts"), train first.
std::vector<std::string> scenario_names(const std::string& system);

} // namespace tdn
