#pragma once

#include <cstdint>
#include <string>

namespace tdn {

/// Everything one experiment needs, loadable from a JSON file. Defaults
/// follow the two case studies; per-system sizes kick in when the explicit
/// fields are left at zero.
struct ExperimentConfig {
    std::string system = "numex";    // numex | tts
    std::string idn_structure = "D1";
    std::string vae_structure = "V1";

    int epochs = 15;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double lambda_v = 1.0;
    double lambda_tl = 0.1;
    int n_samples_train = 1;
    int n_samples_eval = 8;

    double p_add = 0.1;
    double amp_low = 0.5;
    double amp_high = 3.0;

    double expected_far = 0.005;

    std::size_t train_samples = 0;  // 0 -> system default (15000 / 16000)
    std::size_t test_normal = 200;
    std::size_t test_faulty = 0;    // 0 -> system default (800 / 1800)

    std::uint64_t seed = 1;

    std::string data_dir = "data";
    std::string model_dir = "models";
    std::string report_dir = "reports";

    void validate() const;
    void apply_system_defaults();

    std::size_t obs_dim() const { return 5; }

    /// Canonical JSON (sorted keys) with the seed zeroed; runs that differ
    /// only in seed share a hash so cmd_report can merge them.
    std::uint64_t config_hash() const;
    std::string config_hash_hex() const;

    std::string to_json() const;
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
};

} // namespace tdn
