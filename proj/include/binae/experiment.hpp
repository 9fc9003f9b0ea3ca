// Experiment plumbing shared by the command-line tool and the tests: plain
// key = value config files, run manifests that pin every knob before a long
// run starts, and the orchestration cores behind the train/eval/analyze
// subcommands. Precedence is flags > config file > defaults; the manifest a
// run writes is itself a valid config file, so any run can be replayed from
// its manifest alone.
#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "binae/analysis.hpp"
#include "binae/autoencoder.hpp"
#include "binae/errors.hpp"
#include "binae/eval.hpp"

namespace binae {

inline constexpr const char* kToolVersion = "1.0.0";

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline long long parse_int(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": '" + value + "' is not an integer");
    }
    if (pos != value.size()) throw ConfigError("config key " + key + ": '" + value + "' is not an integer");
    return v;
}

inline double parse_float(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": '" + value + "' is not a number");
    }
    if (pos != value.size()) throw ConfigError("config key " + key + ": '" + value + "' is not a number");
    return v;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

// key = value lines; blank lines and '#' comments are skipped. Order is
// preserved so manifests read back the way they were written.
inline std::vector<std::pair<std::string, std::string>> parse_kv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        kv.emplace_back(key, value);
    }
    return kv;
}

// Applies one key to a TrainConfig. Unknown keys are an error unless they
// carry the meta. prefix (manifest bookkeeping).
inline bool apply_train_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key.rfind("meta.", 0) == 0) return false;
    if (key == "k") cfg.k = int(detail::parse_int(key, value));
    else if (key == "n") cfg.n = int(detail::parse_int(key, value));
    else if (key == "epochs_total") cfg.epochs_total = int(detail::parse_int(key, value));
    else if (key == "epochs_continuous") cfg.epochs_continuous = int(detail::parse_int(key, value));
    else if (key == "batch_size") cfg.batch_size = int(detail::parse_int(key, value));
    else if (key == "lr") cfg.lr = detail::parse_float(key, value);
    else if (key == "mask_p_lo") cfg.mask_p_lo = detail::parse_float(key, value);
    else if (key == "mask_p_hi") cfg.mask_p_hi = detail::parse_float(key, value);
    else if (key == "train_samples") cfg.train_samples = std::size_t(detail::parse_int(key, value));
    else if (key == "test_samples") cfg.test_samples = std::size_t(detail::parse_int(key, value));
    else if (key == "restarts") cfg.restarts = int(detail::parse_int(key, value));
    else if (key == "seed") cfg.seed = std::uint64_t(detail::parse_int(key, value));
    else if (key == "val_p") cfg.val_p = detail::parse_float(key, value);
    else if (key == "val_trials") cfg.val_trials = std::size_t(detail::parse_int(key, value));
    else if (key == "history_val_trials") cfg.history_val_trials = std::size_t(detail::parse_int(key, value));
    else throw ConfigError("unknown config key '" + key + "'");
    return true;
}

inline TrainConfig load_train_config(const std::string& path, TrainConfig base = {}) {
    for (const auto& [key, value] : parse_kv_file(path)) apply_train_key(base, key, value);
    return base;
}

inline void write_train_manifest(const TrainConfig& cfg, const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& meta) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("write_train_manifest: cannot open " + path);
    f.precision(17);
    f << "k = " << cfg.k << "\n";
    f << "n = " << cfg.n << "\n";
    f << "epochs_total = " << cfg.epochs_total << "\n";
    f << "epochs_continuous = " << cfg.epochs_continuous << "\n";
    f << "batch_size = " << cfg.batch_size << "\n";
    f << "lr = " << cfg.lr << "\n";
    f << "mask_p_lo = " << cfg.mask_p_lo << "\n";
    f << "mask_p_hi = " << cfg.mask_p_hi << "\n";
    f << "train_samples = " << cfg.train_samples << "\n";
    f << "test_samples = " << cfg.test_samples << "\n";
    f << "restarts = " << cfg.restarts << "\n";
    f << "seed = " << cfg.seed << "\n";
    f << "val_p = " << cfg.val_p << "\n";
    f << "val_trials = " << cfg.val_trials << "\n";
    f << "history_val_trials = " << cfg.history_val_trials << "\n";
    for (const auto& [key, value] : meta) f << "meta." << key << " = " << value << "\n";
    if (!f) throw ArtifactError("write_train_manifest: write failed on " + path);
}

// "a:b:step" inclusive sweep or a comma-separated list.
inline std::vector<double> parse_p_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::istringstream ss(text);
        std::string lo_s, hi_s, step_s;
        if (!std::getline(ss, lo_s, ':') || !std::getline(ss, hi_s, ':') || !std::getline(ss, step_s))
            throw ConfigError("p grid '" + text + "': expected lo:hi:step");
        const double lo = detail::parse_float("p_grid", detail::trim(lo_s));
        const double hi = detail::parse_float("p_grid", detail::trim(hi_s));
        const double step = detail::parse_float("p_grid", detail::trim(step_s));
        if (!(step > 0.0) || hi < lo) throw ConfigError("p grid '" + text + "': need lo <= hi and step > 0");
        for (int i = 0;; ++i) {
            const double p = lo + double(i) * step;
            if (p > hi + step * 1e-9) break;
            grid.push_back(p);
        }
    } else {
        std::istringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const std::string t = detail::trim(tok);
            if (t.empty()) continue;
            grid.push_back(detail::parse_float("p_grid", t));
        }
    }
    if (grid.empty()) throw ConfigError("p grid '" + text + "': no values");
    return grid;
}

struct TrainOutputs {
    RestartResult result;
    std::string manifest_path, checkpoint_path, codebook_path, history_path, restarts_path;
};

inline void save_restart_report_csv(const std::vector<RestartRecord>& report, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("save_restart_report_csv: cannot open " + path);
    f << "restart,seed,d_min,distinct_words,val_bler,selected\n";
    f.precision(17);
    for (const RestartRecord& r : report)
        f << r.restart << "," << r.seed << "," << r.d_min << "," << r.distinct_words << "," << r.val_bler << ","
          << (r.selected ? 1 : 0) << "\n";
    if (!f) throw ArtifactError("save_restart_report_csv: write failed on " + path);
}

// The train-subcommand core: manifest first (so an interrupted run can still
// be replayed), then the restart sweep, then every artifact the other
// subcommands consume.
inline TrainOutputs run_train_command(const TrainConfig& cfg, const std::string& outdir,
                                      const std::string& command_line) {
    cfg.validate();
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    TrainOutputs out;
    out.manifest_path = (fs::path(outdir) / "manifest.txt").string();
    out.checkpoint_path = (fs::path(outdir) / "model.ckpt").string();
    out.codebook_path = (fs::path(outdir) / "codebook.txt").string();
    out.history_path = (fs::path(outdir) / "history.csv").string();
    out.restarts_path = (fs::path(outdir) / "restarts.csv").string();
    write_train_manifest(cfg, out.manifest_path,
                         {{"version", kToolVersion},
                          {"created_utc", detail::utc_timestamp()},
                          {"command", command_line},
                          {"checkpoint", out.checkpoint_path},
                          {"codebook", out.codebook_path},
                          {"history", out.history_path},
                          {"restarts_csv", out.restarts_path}});
    out.result = train_with_restarts(cfg);
    save_checkpoint(out.result.model.params, out.result.model.phase, out.checkpoint_path);
    save_codebook(out.result.model.codebook, out.codebook_path);
    save_history_csv(out.result.model, out.history_path);
    save_restart_report_csv(out.result.report, out.restarts_path);
    return out;
}

// Decoder-only training against the reference code, used by the pairing of
// the classical encoder with the neural decoder. Restarts are screened by
// exhaustive agreement with ML decoding; a perfect decoder short-circuits.
inline TrainedModel train_reference_decoder(const TrainConfig& cfg) {
    const Codebook hamming = hamming74_codebook();
    TrainedModel best;
    double best_agreement = -1.0;
    double best_val = 2.0;
    for (int r = 0; r < cfg.restarts; ++r) {
        TrainConfig c = cfg;
        c.seed = cfg.seed + std::uint64_t(r);
        TrainedModel model = train_decoder_on_codebook(c, hamming);
        const AgreementReport rep = decoder_agreement(hamming, make_neural_decoder(model.params));
        Rng val_rng = Rng(c.seed).split(stream::selection_val);
        const double val = decoder_bler(model.params, hamming, cfg.val_p, cfg.val_trials, val_rng);
        if (rep.agreement > best_agreement || (rep.agreement == best_agreement && val < best_val)) {
            best_agreement = rep.agreement;
            best_val = val;
            best = std::move(model);
        }
        if (best_agreement == 1.0) break;
    }
    return best;
}

// Everything the pairings may need; unavailable pieces stay unset.
struct EvalArtifacts {
    Codebook hamming = hamming74_codebook();
    std::optional<Codebook> ae_codebook;
    std::optional<NetParams> ae_params;
    std::optional<NetParams> hamming_decoder_params;
};

inline BlerCurve curve_for_pairing(const EvalConfig& cfg, const EvalArtifacts& art) {
    switch (cfg.pairing) {
        case Pairing::hamming_ml:
            return run_bler(cfg, art.hamming, make_ml_decoder(art.hamming));
        case Pairing::hamming_aedec:
            if (!art.hamming_decoder_params)
                throw ConfigError("pairing hamming-aedec needs a decoder checkpoint trained on the reference code");
            return run_bler(cfg, art.hamming, make_neural_decoder(*art.hamming_decoder_params));
        case Pairing::aeenc_ml:
            if (!art.ae_codebook) throw ConfigError("pairing aeenc-ml needs a learned codebook (--codebook or --model)");
            return run_bler(cfg, *art.ae_codebook, make_ml_decoder(*art.ae_codebook));
        case Pairing::aeenc_aedec:
            if (!art.ae_codebook || !art.ae_params)
                throw ConfigError("pairing aeenc-aedec needs a model checkpoint (--model)");
            return run_bler(cfg, *art.ae_codebook, make_neural_decoder(*art.ae_params));
    }
    throw ConfigError("unknown pairing");
}

struct AnalyzeOutputs {
    StructureReport report;
    std::optional<AgreementReport> agreement;
};

inline AnalyzeOutputs run_analyze_command(const Codebook& cb, const std::optional<NetParams>& decoder_params) {
    AnalyzeOutputs out;
    out.report = build_structure_report(cb);
    if (decoder_params) {
        if (decoder_params->n != cb.n) throw ConfigError("analyze: decoder checkpoint n != codebook n");
        out.agreement = decoder_agreement(cb, make_neural_decoder(*decoder_params));
    }
    return out;
}

inline std::string agreement_to_text(const AgreementReport& rep) {
    std::ostringstream os;
    os << "words_checked: " << rep.words_checked << "\n";
    os.precision(17);
    os << "agreement: " << rep.agreement << "\n";
    os << "disagreements: " << rep.disagreements.size() << "\n";
    for (const Disagreement& d : rep.disagreements) {
        os << "word: " << word_to_string(d.received) << " neural: " << d.neural << " ml:";
        for (int m : d.ml_set) os << " " << m;
        os << "\n";
    }
    return os.str();
}

}  // namespace binae
