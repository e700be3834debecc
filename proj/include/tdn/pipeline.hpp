#pragma once

#include <string>
#include <vector>

#include "tdn/config.hpp"
#include "tdn/model_io.hpp"
#include "tdn/monitor.hpp"

namespace tdn {

/// Bundle conversions for persistence.
ModelBundle vae_to_bundle(const VaeModel& m, const Scaler& scaler);
VaeModel bundle_to_vae(const ModelBundle& b);
ModelBundle tdn_to_bundle(const TdnModel& m);
TdnModel bundle_to_tdn(const ModelBundle& b);

/// Generate every dataset of the configured system into data_dir. Returns
/// the CSV paths, train set first.
std::vector<std::string> cmd_simulate(const ExperimentConfig& cfg);

/// Fit the scaler, pretrain the VAE on the standardized training set,
/// persist model + scaler and the per-epoch loss trace. Returns model path.
std::string cmd_pretrain(const ExperimentConfig& cfg);

/// Transfer-train the IDN against the frozen pretrained VAE; persist the
/// TDN model and the per-batch loss trace. Returns the model path.
std::string cmd_train(const ExperimentConfig& cfg);

/// Calibrate T^2 statistics and the KDE threshold on the training set, then
/// score every test set: per-fault report, summary, and T^2 / fault
/// estimation traces under report_dir.
DetectionReport cmd_evaluate(const ExperimentConfig& cfg);

/// Merge per-seed evaluation reports (mean/std per fault). Refuses runs
/// whose config hash differs; missing runs are listed with a warning.
void cmd_report(const ExperimentConfig& cfg, const std::vector<std::string>& run_dirs,
                const std::string& out_path);

} // namespace tdn
