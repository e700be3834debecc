// Command-line front end: simulate | pretrain | train | evaluate | report,
// all driven by a JSON config file plus optional flag overrides.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdn/errors.hpp"
#include "tdn/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Overrides {
    std::string system, idn_structure, vae_structure;
    double lambda_tl = -1, lambda_v = -1, learning_rate = -1, expected_far = -1;
    int epochs = -1;
    long long seed = -1;
    std::string data_dir, model_dir, report_dir;
};

void add_override_flags(CLI::App* cmd, Overrides& o, std::string& config_path) {
    cmd->add_option("-c,--config", config_path, "experiment config (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--system", o.system, "numex | tts");
    cmd->add_option("--idn", o.idn_structure, "IDN structure (D1|D2|D3)");
    cmd->add_option("--vae", o.vae_structure, "VAE structure (V1..V6)");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_option("--seed", o.seed, "global seed");
    cmd->add_option("--lambda-tl", o.lambda_tl, "MMD weight in the transfer loss");
    cmd->add_option("--lambda-v", o.lambda_v, "KL weight in the VAE loss");
    cmd->add_option("--learning-rate", o.learning_rate, "RMSProp learning rate");
    cmd->add_option("--expected-far", o.expected_far, "threshold target false alarm rate");
    cmd->add_option("--data-dir", o.data_dir, "dataset directory");
    cmd->add_option("--model-dir", o.model_dir, "model directory");
    cmd->add_option("--report-dir", o.report_dir, "report directory");
}

tdn::ExperimentConfig resolve_config(const std::string& config_path, const Overrides& o) {
    tdn::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = tdn::ExperimentConfig::from_json_file(config_path);
    if (!o.system.empty()) cfg.system = o.system;
    if (!o.idn_structure.empty()) cfg.idn_structure = o.idn_structure;
    if (!o.vae_structure.empty()) cfg.vae_structure = o.vae_structure;
    if (o.epochs >= 0) cfg.epochs = o.epochs;
    if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
    if (o.lambda_tl >= 0) cfg.lambda_tl = o.lambda_tl;
    if (o.lambda_v >= 0) cfg.lambda_v = o.lambda_v;
    if (o.learning_rate >= 0) cfg.learning_rate = o.learning_rate;
    if (o.expected_far >= 0) cfg.expected_far = o.expected_far;
    if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
    if (!o.model_dir.empty()) cfg.model_dir = o.model_dir;
    if (!o.report_dir.empty()) cfg.report_dir = o.report_dir;
    cfg.apply_system_defaults();
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transfer-learning input-output decoupled network for fault "
                 "detection and estimation"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "experiment config (JSON)")
        ->check(CLI::ExistingFile);

    Overrides o;
    std::vector<std::string> report_runs;
    std::string report_out = "merged_report.csv";

    CLI::App* sim = app.add_subcommand("simulate", "generate train/test datasets");
    CLI::App* pre = app.add_subcommand("pretrain", "pretrain the VAE on normal data");
    CLI::App* trn = app.add_subcommand("train", "transfer-train the IDN (TDN phase)");
    CLI::App* evl = app.add_subcommand("evaluate", "score all fault sets and emit reports");
    CLI::App* rep = app.add_subcommand("report", "merge evaluation reports across seeds");
    for (CLI::App* cmd : {sim, pre, trn, evl, rep}) add_override_flags(cmd, o, config_path);
    rep->add_option("--runs", report_runs, "report directories of the runs to merge")
        ->required();
    rep->add_option("--out", report_out, "merged report path");

    CLI11_PARSE(app, argc, argv);

    try {
        const tdn::ExperimentConfig cfg = resolve_config(config_path, o);
        if (sim->parsed()) {
            tdn::cmd_simulate(cfg);
        } else if (pre->parsed()) {
            tdn::cmd_pretrain(cfg);
        } else if (trn->parsed()) {
            tdn::cmd_train(cfg);
        } else if (evl->parsed()) {
            tdn::cmd_evaluate(cfg);
        } else if (rep->parsed()) {
            tdn::cmd_report(cfg, report_runs, report_out);
        }
        return kExitOk;
    } catch (const tdn::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const tdn::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const tdn::TrainError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return kExitNumeric;
    } catch (const tdn::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const tdn::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}
