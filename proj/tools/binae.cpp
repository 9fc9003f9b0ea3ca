// command line front end: train / eval / analyze / report
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "binae/autoencoder.hpp"
#include "binae/classic.hpp"
#include "binae/errors.hpp"
#include "binae/eval.hpp"
#include "binae/experiment.hpp"
#include "binae/report_json.hpp"

namespace fs = std::filesystem;
using namespace binae;

namespace {

struct TrainFlags {
    std::string config_path;
    std::string outdir = "binae_out";
    std::optional<int> k, n, epochs_total, epochs_continuous, batch_size, restarts;
    std::optional<double> lr, mask_p_lo, mask_p_hi, val_p;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> train_samples, test_samples, val_trials, history_val_trials;
};

// precedence: explicit flags > config file > built-in defaults
TrainConfig resolve_train_config(const TrainFlags& fl) {
    TrainConfig cfg;
    if (!fl.config_path.empty()) cfg = load_train_config(fl.config_path, cfg);
    if (fl.k) cfg.k = *fl.k;
    if (fl.n) cfg.n = *fl.n;
    if (fl.epochs_total) cfg.epochs_total = *fl.epochs_total;
    if (fl.epochs_continuous) cfg.epochs_continuous = *fl.epochs_continuous;
    if (fl.batch_size) cfg.batch_size = *fl.batch_size;
    if (fl.restarts) cfg.restarts = *fl.restarts;
    if (fl.lr) cfg.lr = *fl.lr;
    if (fl.mask_p_lo) cfg.mask_p_lo = *fl.mask_p_lo;
    if (fl.mask_p_hi) cfg.mask_p_hi = *fl.mask_p_hi;
    if (fl.val_p) cfg.val_p = *fl.val_p;
    if (fl.seed) cfg.seed = *fl.seed;
    if (fl.train_samples) cfg.train_samples = *fl.train_samples;
    if (fl.test_samples) cfg.test_samples = *fl.test_samples;
    if (fl.val_trials) cfg.val_trials = *fl.val_trials;
    if (fl.history_val_trials) cfg.history_val_trials = *fl.history_val_trials;
    return cfg;
}

void add_train_flags(CLI::App* cmd, TrainFlags& fl) {
    cmd->add_option("--config", fl.config_path, "key = value config file");
    cmd->add_option("--out", fl.outdir, "output directory")->envname("BINAE_OUTDIR");
    cmd->add_option("--k", fl.k, "message bits");
    cmd->add_option("--n", fl.n, "code bits");
    cmd->add_option("--epochs-total", fl.epochs_total, "total training epochs");
    cmd->add_option("--epochs-continuous", fl.epochs_continuous, "epochs before binarization");
    cmd->add_option("--batch-size", fl.batch_size, "minibatch size");
    cmd->add_option("--restarts", fl.restarts, "independent restarts");
    cmd->add_option("--lr", fl.lr, "adam learning rate");
    cmd->add_option("--mask-p-lo", fl.mask_p_lo, "lower mask flip probability");
    cmd->add_option("--mask-p-hi", fl.mask_p_hi, "upper mask flip probability");
    cmd->add_option("--val-p", fl.val_p, "validation channel flip probability");
    cmd->add_option("--seed", fl.seed, "base rng seed");
    cmd->add_option("--train-samples", fl.train_samples, "training samples per epoch");
    cmd->add_option("--test-samples", fl.test_samples, "monte carlo budget for final evaluation");
    cmd->add_option("--val-trials", fl.val_trials, "trials for restart selection");
    cmd->add_option("--history-val-trials", fl.history_val_trials, "trials for per-epoch validation");
}

std::string joined_command(int argc, char** argv) {
    std::ostringstream os;
    for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
    return os.str();
}

int cmd_train(const TrainFlags& fl, const std::string& command_line) {
    const TrainConfig cfg = resolve_train_config(fl);
    const TrainOutputs out = run_train_command(cfg, fl.outdir, command_line);
    std::cout << "restart,seed,d_min,distinct_words,val_bler,selected\n";
    std::cout.precision(6);
    for (const RestartRecord& r : out.result.report)
        std::cout << r.restart << "," << r.seed << "," << r.d_min << "," << r.distinct_words << "," << r.val_bler
                  << "," << (r.selected ? 1 : 0) << "\n";
    const StructureReport rep = build_structure_report(out.result.model.codebook);
    std::cout << "\n" << report_to_text(rep);
    std::cout << "\nwrote " << out.manifest_path << "\n";
    std::cout << "wrote " << out.checkpoint_path << "\n";
    std::cout << "wrote " << out.codebook_path << "\n";
    std::cout << "wrote " << out.history_path << "\n";
    std::cout << "wrote " << out.restarts_path << "\n";
    return 0;
}

struct EvalFlags {
    std::string pairing = "all";
    std::string model_path, codebook_path, hamming_decoder_path;
    std::string p_grid = "0.01:0.1:0.01";
    std::size_t trials = 1000000;
    std::uint64_t seed = 1;
    std::string outdir = "binae_out";
    std::uint64_t decoder_train_seed = 1;
};

int cmd_eval(const EvalFlags& fl) {
    EvalConfig cfg;
    cfg.p_grid = parse_p_grid(fl.p_grid);
    cfg.trials_per_p = fl.trials;
    cfg.seed = fl.seed;

    std::vector<Pairing> pairings;
    if (fl.pairing == "all")
        pairings = {Pairing::hamming_ml, Pairing::hamming_aedec, Pairing::aeenc_ml, Pairing::aeenc_aedec};
    else
        pairings = {parse_pairing(fl.pairing)};

    EvalArtifacts art;
    if (!fl.model_path.empty()) {
        const Checkpoint ck = load_checkpoint(fl.model_path);
        art.ae_params = ck.params;
        art.ae_codebook = extract_codebook(ck.params);
    }
    if (!fl.codebook_path.empty()) art.ae_codebook = load_codebook(fl.codebook_path);
    if (!fl.hamming_decoder_path.empty()) {
        const Checkpoint ck = load_checkpoint(fl.hamming_decoder_path, std::make_pair(4, 7));
        art.hamming_decoder_params = ck.params;
    }

    const bool wants_hamming_aedec =
        std::find(pairings.begin(), pairings.end(), Pairing::hamming_aedec) != pairings.end();
    if (wants_hamming_aedec && !art.hamming_decoder_params) {
        std::cout << "no decoder checkpoint for the reference code, training one (--hamming-decoder skips this)\n";
        TrainConfig tc;  // defaults; decoder-only training against the fixed code
        tc.seed = fl.decoder_train_seed;
        const TrainedModel dec = train_reference_decoder(tc);
        fs::create_directories(fl.outdir);
        const std::string path = (fs::path(fl.outdir) / "hamming_decoder.ckpt").string();
        save_checkpoint(dec.params, dec.phase, path);
        std::cout << "wrote " << path << "\n";
        art.hamming_decoder_params = dec.params;
    }

    fs::create_directories(fl.outdir);
    std::cout << "pairing,p,bler,se,errors,trials\n";
    std::cout.precision(10);
    for (Pairing p : pairings) {
        EvalConfig pc = cfg;
        pc.pairing = p;
        const BlerCurve curve = curve_for_pairing(pc, art);
        const std::string path = (fs::path(fl.outdir) / curve_filename(p, pc.seed)).string();
        save_curve_csv(curve, path);
        for (const BlerPoint& pt : curve.points)
            std::cout << pairing_tag(p) << "," << pt.p << "," << pt.bler << "," << pt.se << "," << pt.errors << ","
                      << pt.trials << "\n";
    }
    return 0;
}

struct AnalyzeFlags {
    std::string codebook_path;
    std::string decoder_path;
    std::string outdir = "binae_out";
};

int cmd_analyze(const AnalyzeFlags& fl) {
    const Codebook cb = load_codebook(fl.codebook_path);
    std::optional<NetParams> dec;
    if (!fl.decoder_path.empty()) dec = load_checkpoint(fl.decoder_path).params;
    const AnalyzeOutputs out = run_analyze_command(cb, dec);

    fs::create_directories(fl.outdir);
    const std::string text = report_to_text(out.report);
    {
        std::ofstream f(fs::path(fl.outdir) / "report.txt");
        if (!f) throw ArtifactError("analyze: cannot open report.txt");
        f << text;
    }
    save_report_json(out.report, (fs::path(fl.outdir) / "report.json").string());
    save_spectrum_csv(out.report.spectrum, (fs::path(fl.outdir) / "spectrum.csv").string());
    std::cout << text;
    if (out.agreement) {
        const std::string ag = agreement_to_text(*out.agreement);
        std::ofstream f(fs::path(fl.outdir) / "agreement.txt");
        if (!f) throw ArtifactError("analyze: cannot open agreement.txt");
        f << ag;
        std::cout << ag;
    }
    return 0;
}

struct ReportFlags {
    std::string baseline_path;
    std::vector<std::string> curve_paths;
};

int cmd_report(const ReportFlags& fl) {
    const BlerCurve base = load_curve_csv(fl.baseline_path);
    std::cout << "curve,p,bler,baseline_bler,z\n";
    std::cout.precision(10);
    bool all_within = true;
    for (const std::string& path : fl.curve_paths) {
        const BlerCurve other = load_curve_csv(path);
        const CurveComparison cmp = compare_curves(other, base);
        for (const ComparisonRow& row : cmp.rows)
            std::cout << fs::path(path).filename().string() << "," << row.p << "," << row.bler_a << ","
                      << row.bler_b << "," << row.z << "\n";
        if (cmp.any_exceeds_4) all_within = false;
        std::cout << "# " << fs::path(path).filename().string() << " max |z| = " << cmp.max_abs_z
                  << (cmp.any_exceeds_4 ? " (exceeds 4)" : " (within 4)") << "\n";
    }
    std::cout << (all_within ? "all curves within 4 sigma of the baseline\n"
                             : "some curve deviates beyond 4 sigma\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary autoencoder channel codes: training, evaluation, and code analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    TrainFlags train_fl;
    CLI::App* train_cmd = app.add_subcommand("train", "learn a code with restarts and write artifacts");
    add_train_flags(train_cmd, train_fl);

    EvalFlags eval_fl;
    CLI::App* eval_cmd = app.add_subcommand("eval", "monte carlo block error rate curves");
    eval_cmd->add_option("--pairing", eval_fl.pairing,
                         "hamming-ml, hamming-aedec, aeenc-ml, aeenc-aedec, or all");
    eval_cmd->add_option("--model", eval_fl.model_path, "model checkpoint for the learned pairings");
    eval_cmd->add_option("--codebook", eval_fl.codebook_path, "codebook file for the learned encoder");
    eval_cmd->add_option("--hamming-decoder", eval_fl.hamming_decoder_path,
                         "decoder checkpoint trained on the reference code");
    eval_cmd->add_option("--p-grid", eval_fl.p_grid, "lo:hi:step sweep or comma list");
    eval_cmd->add_option("--trials", eval_fl.trials, "monte carlo trials per grid point");
    eval_cmd->add_option("--seed", eval_fl.seed, "evaluation rng seed");
    eval_cmd->add_option("--decoder-train-seed", eval_fl.decoder_train_seed,
                         "seed when training the reference decoder on the fly");
    eval_cmd->add_option("--out", eval_fl.outdir, "output directory")->envname("BINAE_OUTDIR");

    AnalyzeFlags analyze_fl;
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "structural analysis of a codebook");
    analyze_cmd->add_option("--codebook", analyze_fl.codebook_path, "codebook file")->required();
    analyze_cmd->add_option("--decoder", analyze_fl.decoder_path,
                            "checkpoint for exhaustive decoder-vs-ML agreement");
    analyze_cmd->add_option("--out", analyze_fl.outdir, "output directory")->envname("BINAE_OUTDIR");

    ReportFlags report_fl;
    CLI::App* report_cmd = app.add_subcommand("report", "compare saved curves against a baseline");
    report_cmd->add_option("--baseline", report_fl.baseline_path, "baseline curve csv")->required();
    report_cmd->add_option("--curve", report_fl.curve_paths, "curve csv to compare (repeatable)")
        ->required()
        ->take_all();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_fl, joined_command(argc, argv));
        if (eval_cmd->parsed()) return cmd_eval(eval_fl);
        if (analyze_cmd->parsed()) return cmd_analyze(analyze_fl);
        if (report_cmd->parsed()) return cmd_report(report_fl);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ArtifactError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {  // ConfigError included
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
