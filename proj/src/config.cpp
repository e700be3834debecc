#include "tdn/config.hpp"

#include <cinttypes>
#include <cstdio>

#include <json.hpp>

#include "tdn/dataset_io.hpp"
#include "tdn/errors.hpp"
#include "tdn/rng.hpp"

namespace tdn {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (system != "numex" && system != "tts")
        throw ConfigError("config: system must be 'numex' or 'tts'");
    if (idn_structure != "D1" && idn_structure != "D2" && idn_structure != "D3")
        throw ConfigError("config: idn_structure must be D1, D2 or D3");
    if (vae_structure.size() != 2 || vae_structure[0] != 'V' || vae_structure[1] < '1' ||
        vae_structure[1] > '6')
        throw ConfigError("config: vae_structure must be V1..V6");
    if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
    if (batch_size == 0) throw ConfigError("config: batch_size must be positive");
    if (learning_rate <= 0) throw ConfigError("config: learning_rate must be positive");
    if (lambda_v <= 0) throw ConfigError("config: lambda_v must be positive");
    if (lambda_tl < 0) throw ConfigError("config: lambda_tl must be >= 0");
    if (p_add < 0 || p_add > 1) throw ConfigError("config: p_add must be in [0, 1]");
    if (amp_low < 0 || amp_high < amp_low)
        throw ConfigError("config: fault amplitude bounds must satisfy 0 <= low <= high");
    if (expected_far <= 0 || expected_far >= 1)
        throw ConfigError("config: expected_far must be in (0, 1)");
    if (n_samples_train < 1 || n_samples_eval < 1)
        throw ConfigError("config: Monte Carlo sample counts must be >= 1");
}

void ExperimentConfig::apply_system_defaults() {
    if (train_samples == 0) train_samples = (system == "tts") ? 16000 : 15000;
    if (test_faulty == 0) test_faulty = (system == "tts") ? 1800 : 800;
}

namespace {

json to_json_object(const ExperimentConfig& c, bool with_run_identity) {
    json j;
    j["system"] = c.system;
    j["idn_structure"] = c.idn_structure;
    j["vae_structure"] = c.vae_structure;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["lambda_v"] = c.lambda_v;
    j["lambda_tl"] = c.lambda_tl;
    j["n_samples_train"] = c.n_samples_train;
    j["n_samples_eval"] = c.n_samples_eval;
    j["p_add"] = c.p_add;
    j["amp_low"] = c.amp_low;
    j["amp_high"] = c.amp_high;
    j["expected_far"] = c.expected_far;
    j["train_samples"] = c.train_samples;
    j["test_normal"] = c.test_normal;
    j["test_faulty"] = c.test_faulty;
    if (with_run_identity) {
        j["seed"] = c.seed;
        j["data_dir"] = c.data_dir;
        j["model_dir"] = c.model_dir;
        j["report_dir"] = c.report_dir;
    }
    return j;
}

} // namespace

std::uint64_t ExperimentConfig::config_hash() const {
    // The hash identifies the experiment, not the run: the seed and the
    // output locations are excluded so repeated seeds can be merged.
    ExperimentConfig canonical = *this;
    canonical.apply_system_defaults();
    return fnv1a64(to_json_object(canonical, /*with_run_identity=*/false).dump());
}

std::string ExperimentConfig::config_hash_hex() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, config_hash());
    return buf;
}

std::string ExperimentConfig::to_json() const {
    return to_json_object(*this, true).dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("system", c.system);
        get("idn_structure", c.idn_structure);
        get("vae_structure", c.vae_structure);
        get("epochs", c.epochs);
        get("batch_size", c.batch_size);
        get("learning_rate", c.learning_rate);
        get("lambda_v", c.lambda_v);
        get("lambda_tl", c.lambda_tl);
        get("n_samples_train", c.n_samples_train);
        get("n_samples_eval", c.n_samples_eval);
        get("p_add", c.p_add);
        get("amp_low", c.amp_low);
        get("amp_high", c.amp_high);
        get("expected_far", c.expected_far);
        get("train_samples", c.train_samples);
        get("test_normal", c.test_normal);
        get("test_faulty", c.test_faulty);
        get("seed", c.seed);
        get("data_dir", c.data_dir);
        get("model_dir", c.model_dir);
        get("report_dir", c.report_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    c.apply_system_defaults();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    return from_json_text(read_text_file(path));
}

} // namespace tdn
