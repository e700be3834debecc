#include "tdn/pipeline.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "tdn/architectures.hpp"
#include "tdn/dataset_io.hpp"
#include "tdn/errors.hpp"

namespace tdn {

namespace fs = std::filesystem;

ModelBundle vae_to_bundle(const VaeModel& m, const Scaler& scaler) {
    ModelBundle b;
    b.role = "vae";
    b.networks = {{"trunk", m.trunk},
                  {"mean_head", m.mean_head},
                  {"logvar_head", m.logvar_head},
                  {"decoder", m.decoder}};
    b.scaler = scaler;
    b.meta["latent_dim"] = static_cast<double>(m.latent_dim);
    b.meta["n_samples"] = static_cast<double>(m.n_samples);
    b.meta["lambda_v"] = m.lambda_v;
    b.meta["pretrained"] = m.pretrained ? 1.0 : 0.0;
    return b;
}

VaeModel bundle_to_vae(const ModelBundle& b) {
    if (b.role != "vae" && b.role != "tdn")
        throw IoError("model bundle role '" + b.role + "' does not contain a VAE");
    VaeModel m;
    m.trunk = b.network("trunk");
    m.mean_head = b.network("mean_head");
    m.logvar_head = b.network("logvar_head");
    m.decoder = b.network("decoder");
    m.latent_dim = static_cast<std::size_t>(b.meta.at("latent_dim"));
    m.n_samples = static_cast<int>(b.meta.at("n_samples"));
    m.lambda_v = b.meta.at("lambda_v");
    m.pretrained = b.meta.at("pretrained") != 0.0;
    validate_vae(m);
    return m;
}

ModelBundle tdn_to_bundle(const TdnModel& m) {
    ModelBundle b = vae_to_bundle(m.vae, m.scaler);
    b.role = "tdn";
    b.networks.emplace_back("idn_core", m.idn.core);
    return b;
}

TdnModel bundle_to_tdn(const ModelBundle& b) {
    if (b.role != "tdn") throw IoError("model bundle role '" + b.role + "' is not a TDN");
    if (!b.scaler) throw IoError("TDN model bundle is missing its scaler");
    TdnModel m;
    m.idn.core = b.network("idn_core");
    m.vae = bundle_to_vae(b);
    m.scaler = *b.scaler;
    validate_idn(m.idn);
    return m;
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
}

std::string dataset_path(const ExperimentConfig& cfg, const std::string& scenario) {
    return cfg.data_dir + "/" + scenario + ".csv";
}

Matrix standardized_train(const ExperimentConfig& cfg, const Scaler& scaler) {
    const Dataset train = read_dataset_csv(dataset_path(cfg, cfg.system + "-train"));
    return apply_scaler(scaler, train.z);
}

std::string hash_line(const ExperimentConfig& cfg) {
    return "# config_hash=" + cfg.config_hash_hex() + " seed=" + std::to_string(cfg.seed) + "\n";
}

} // namespace

std::vector<std::string> cmd_simulate(const ExperimentConfig& cfg) {
    ensure_dir(cfg.data_dir);
    std::vector<std::string> written;
    for (const std::string& scenario : scenario_names(cfg.system)) {
        ScenarioSpec spec;
        spec.name = scenario;
        spec.train_samples = cfg.train_samples;
        spec.test_normal = cfg.test_normal;
        spec.test_faulty = cfg.test_faulty;
        Dataset ds = gen_dataset(spec, cfg.seed);
        const std::string path = dataset_path(cfg, scenario);
        write_dataset_csv(ds, path, cfg.config_hash());
        written.push_back(path);
        std::printf("[simulate] %s: %zu samples\n", scenario.c_str(), ds.z.rows());
    }
    return written;
}

std::string cmd_pretrain(const ExperimentConfig& cfg) {
    ensure_dir(cfg.model_dir);
    const Dataset train = read_dataset_csv(dataset_path(cfg, cfg.system + "-train"));
    const Scaler scaler = fit_scaler(train.z);
    const Matrix z_std = apply_scaler(scaler, train.z);

    RngStream init(cfg.seed, "init.vae");
    VaeModel vae = build_vae(cfg.vae_structure, z_std.cols(), init);
    vae.lambda_v = cfg.lambda_v;
    vae.n_samples = cfg.n_samples_train;

    PretrainHyper hyper{cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.seed};
    const auto trace = pretrain_vae(vae, z_std, hyper);

    std::string csv = hash_line(cfg) + "epoch,j_v,recon,kl\n";
    for (const auto& e : trace)
        csv += std::to_string(e.epoch) + "," + format_double(e.total) + "," +
               format_double(e.recon) + "," + format_double(e.kl) + "\n";
    write_text_file(cfg.model_dir + "/vae_loss.csv", csv);

    const std::string path = cfg.model_dir + "/vae.model";
    save_model(vae_to_bundle(vae, scaler), path);
    if (!trace.empty())
        std::printf("[pretrain] %s: J_V %.5f -> %.5f over %d epochs\n", cfg.vae_structure.c_str(),
                    trace.front().total, trace.back().total, cfg.epochs);
    return path;
}

std::string cmd_train(const ExperimentConfig& cfg) {
    ensure_dir(cfg.model_dir);
    const std::string vae_path = cfg.model_dir + "/vae.model";
    if (!fs::exists(vae_path)) throw IoError("missing pretrained VAE: " + vae_path);
    ModelBundle vae_bundle = load_model(vae_path);

    TdnModel model;
    model.vae = bundle_to_vae(vae_bundle);
    if (!model.vae.pretrained) throw TrainError("cmd_train: VAE has not been pretrained");
    model.vae.set_frozen(true);
    model.scaler = *vae_bundle.scaler;
    const std::uint64_t vae_checksum = model_checksum(vae_to_bundle(model.vae, model.scaler));

    RngStream init(cfg.seed, "init.idn");
    model.idn = build_idn(cfg.idn_structure, model.vae.obs_dim(), init);

    const Matrix z_std = standardized_train(cfg, model.scaler);
    const FaultSampler sampler =
        FaultSampler::uniform(z_std.cols(), cfg.p_add, cfg.amp_low, cfg.amp_high);
    TdnTrainHyper hyper{cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.lambda_tl, cfg.seed};
    const auto trace = train_tdn(model, z_std, sampler, hyper);

    // The in-memory guard ran inside train_tdn; verify once more at the
    // command boundary before persisting.
    if (model_checksum(vae_to_bundle(model.vae, model.scaler)) != vae_checksum)
        throw TrainError("cmd_train: VAE checksum mismatch after training");

    std::string csv = hash_line(cfg) + "epoch,batch,j_v_n,j_v_f,j_mmd,j_tl\n";
    for (const auto& b : trace)
        csv += std::to_string(b.epoch) + "," + std::to_string(b.batch) + "," +
               format_double(b.jv_n) + "," + format_double(b.jv_f) + "," +
               format_double(b.jmmd) + "," + format_double(b.total) + "\n";
    write_text_file(cfg.model_dir + "/tdn_loss.csv", csv);

    const std::string path = cfg.model_dir + "/tdn.model";
    save_model(tdn_to_bundle(model), path);
    if (!trace.empty())
        std::printf("[train] %s-%s: J_tl %.5f -> %.5f over %d epochs\n",
                    cfg.idn_structure.c_str(), cfg.vae_structure.c_str(), trace.front().total,
                    trace.back().total, cfg.epochs);
    return path;
}

DetectionReport cmd_evaluate(const ExperimentConfig& cfg) {
    ensure_dir(cfg.report_dir);
    const std::string tdn_path = cfg.model_dir + "/tdn.model";
    if (!fs::exists(tdn_path)) throw IoError("missing trained TDN: " + tdn_path);
    const TdnModel model = bundle_to_tdn(load_model(tdn_path));

    const Matrix z_std = standardized_train(cfg, model.scaler);
    if (z_std.cols() != model.idn.dim())
        throw ShapeError("cmd_evaluate: dataset dimension does not match the model");
    const Matrix phi_train = residuals(model, z_std);
    const ResidualStats stats = fit_stats(phi_train);
    const Threshold threshold = learn_threshold(t2_batch(stats, phi_train), cfg.expected_far);

    std::vector<FaultScore> scores;
    auto scenarios = scenario_names(cfg.system);
    for (const std::string& scenario : scenarios) {
        if (scenario.find("-test-") == std::string::npos) continue;
        const Dataset ds = read_dataset_csv(dataset_path(cfg, scenario));
        if (ds.labels.empty()) throw DataError("empty test set: " + scenario);
        const Matrix zt = apply_scaler(model.scaler, ds.z);
        const Matrix phi = residuals(model, zt);
        const std::vector<double> t2 = t2_batch(stats, phi);
        std::vector<int> pred(t2.size());
        for (std::size_t k = 0; k < t2.size(); ++k)
            pred[k] = classify_faulty(threshold, t2[k]) ? 1 : 0;

        // Fault estimates and ground truth are compared in physical units.
        const Matrix f_est = estimate_fault_physical(model, zt);
        scores.push_back(
            score_fault(ds.fault_id, pred, ds.labels, f_est, ds.fault_truth, ds.additive_truth));

        std::string t2_csv = hash_line(cfg) + "k,t2,j_th,label,prediction\n";
        for (std::size_t k = 0; k < t2.size(); ++k)
            t2_csv += std::to_string(k) + "," + format_double(t2[k]) + "," +
                      format_double(threshold.j_th) + "," + std::to_string(ds.labels[k]) + "," +
                      std::to_string(pred[k]) + "\n";
        write_text_file(cfg.report_dir + "/t2_" + ds.fault_id + ".csv", t2_csv);

        std::string fe_csv = hash_line(cfg) + "k,variable,f_true,f_est\n";
        for (std::size_t k = 0; k < f_est.rows(); ++k)
            for (std::size_t j = 0; j < f_est.cols(); ++j)
                fe_csv += std::to_string(k) + "," + std::to_string(j + 1) + "," +
                          format_double(ds.fault_truth(k, j)) + "," +
                          format_double(f_est(k, j)) + "\n";
        write_text_file(cfg.report_dir + "/fe_" + ds.fault_id + ".csv", fe_csv);
    }

    DetectionReport report = make_report(std::move(scores), threshold.j_th, cfg.seed);

    std::string csv = hash_line(cfg) + "fault_id,far,mdr,rmse,additive,n_fa,n_ta,n_md,n_rd\n";
    for (const auto& s : report.per_fault)
        csv += s.fault_id + "," + format_double(s.far) + "," + format_double(s.mdr) + "," +
               format_double(s.rmse) + "," + (s.additive ? "1" : "0") + "," +
               std::to_string(s.n_fa) + "," + std::to_string(s.n_ta) + "," +
               std::to_string(s.n_md) + "," + std::to_string(s.n_rd) + "\n";
    csv += "AVERAGE," + format_double(report.afar) + "," + format_double(report.amdr) + "," +
           format_double(report.armse) + ",,,,,\n";
    csv += "# afar=" + format_double(report.afar) + " amdr=" + format_double(report.amdr) +
           " armse=" + format_double(report.armse) + " j_th=" + format_double(report.j_th) +
           " seed=" + std::to_string(report.seed) + "\n";
    write_text_file(cfg.report_dir + "/report.csv", csv);

    char buf[256];
    std::string txt = "Detection / estimation summary (" + cfg.system + ", " +
                      cfg.idn_structure + "-" + cfg.vae_structure + ")\n";
    txt += "config_hash " + cfg.config_hash_hex() + ", seed " + std::to_string(cfg.seed) + "\n\n";
    txt += "fault     FAR%     MDR%     RMSE\n";
    for (const auto& s : report.per_fault) {
        std::snprintf(buf, sizeof(buf), "%-6s %7.3f  %7.3f  %s\n", s.fault_id.c_str(),
                      100.0 * s.far, 100.0 * s.mdr,
                      s.additive ? format_double(s.rmse).c_str() : "-");
        txt += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "\nAFAR %.3f%%  AMDR %.3f%%  ARMSE %.4f (additive faults)  J_th %.6g\n",
                  100.0 * report.afar, 100.0 * report.amdr, report.armse, report.j_th);
    txt += buf;
    write_text_file(cfg.report_dir + "/report.txt", txt);

    std::printf("[evaluate] AFAR %.3f%%  AMDR %.3f%%  ARMSE %.4f  J_th %.6g\n",
                100.0 * report.afar, 100.0 * report.amdr, report.armse, report.j_th);
    return report;
}

namespace {

struct ReportRow {
    double far = 0, mdr = 0, rmse = 0;
    bool additive = false;
};

std::map<std::string, ReportRow> parse_report_csv(const std::string& path,
                                                  std::string* hash_out) {
    const std::string text = read_text_file(path);
    std::map<std::string, ReportRow> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto key = line.find("config_hash=");
            if (key != std::string::npos && hash_out) *hash_out = line.substr(key + 12, 16);
            continue;
        }
        if (line.rfind("fault_id,", 0) == 0 || line.rfind("AVERAGE,", 0) == 0) continue;
        ReportRow row;
        char id[32];
        int additive = 0;
        if (std::sscanf(line.c_str(), "%31[^,],%lf,%lf,%lf,%d", id, &row.far, &row.mdr,
                        &row.rmse, &additive) >= 4) {
            row.additive = additive != 0;
            rows[id] = row;
        }
    }
    return rows;
}

} // namespace

void cmd_report(const ExperimentConfig& cfg, const std::vector<std::string>& run_dirs,
                const std::string& out_path) {
    const std::string expect_hash = cfg.config_hash_hex();
    std::map<std::string, std::vector<ReportRow>> merged;
    std::size_t runs_found = 0;
    for (const std::string& dir : run_dirs) {
        const std::string path = dir + "/report.csv";
        if (!fs::exists(path)) {
            std::fprintf(stderr, "[report] warning: missing run %s\n", path.c_str());
            continue;
        }
        std::string hash;
        auto rows = parse_report_csv(path, &hash);
        if (hash != expect_hash)
            throw DataError("cmd_report: config hash mismatch for " + path + " (" + hash +
                            " != " + expect_hash + ")");
        for (const auto& [id, row] : rows) merged[id].push_back(row);
        ++runs_found;
    }
    if (runs_found == 0) throw DataError("cmd_report: no runs found");

    auto mean_std = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        // std column stays empty for a single run
        std::string sd;
        if (v.size() > 1) sd = format_double(std::sqrt(s / static_cast<double>(v.size() - 1)));
        return std::pair<double, std::string>(m, sd);
    };

    std::string csv = "# config_hash=" + expect_hash + " runs=" + std::to_string(runs_found) +
                      "\nfault_id,far_mean,far_std,mdr_mean,mdr_std,rmse_mean,rmse_std,runs\n";
    double afar = 0, amdr = 0, armse = 0;
    std::size_t n_add = 0;
    for (const auto& [id, rows] : merged) {
        std::vector<double> fars, mdrs, rmses;
        for (const auto& r : rows) {
            fars.push_back(r.far);
            mdrs.push_back(r.mdr);
            rmses.push_back(r.rmse);
        }
        const auto [fm, fstd] = mean_std(fars);
        const auto [mm, mstd] = mean_std(mdrs);
        const auto [rm, rstd] = mean_std(rmses);
        csv += id + "," + format_double(fm) + "," + fstd + "," + format_double(mm) + "," +
               mstd + "," + format_double(rm) + "," + rstd + "," +
               std::to_string(rows.size()) + "\n";
        afar += fm;
        amdr += mm;
        if (rows.front().additive) {
            armse += rm;
            ++n_add;
        }
    }
    if (!merged.empty()) {
        afar /= static_cast<double>(merged.size());
        amdr /= static_cast<double>(merged.size());
    }
    if (n_add) armse /= static_cast<double>(n_add);
    csv += "AVERAGE," + format_double(afar) + ",," + format_double(amdr) + ",," +
           format_double(armse) + ",," + std::to_string(runs_found) + "\n";
    write_text_file(out_path, csv);
    std::printf("[report] merged %zu runs -> %s\n", runs_found, out_path.c_str());
}

} // namespace tdn
