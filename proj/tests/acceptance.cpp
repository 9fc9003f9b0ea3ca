// acceptance suite: one verdict line per criterion, nonzero exit on any failure
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "binae/autoencoder.hpp"
#include "binae/analysis.hpp"
#include "binae/channel.hpp"
#include "binae/classic.hpp"
#include "binae/eval.hpp"
#include "binae/experiment.hpp"
#include "binae/nn.hpp"
#include "binae/numerics.hpp"

namespace fs = std::filesystem;
using namespace binae;

namespace {

struct Verdict {
    int criterion;
    bool pass;
    std::string detail;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---- criterion 1: gradient correctness -------------------------------------

std::vector<double> flatten_params(NetParams& p) {
    std::vector<double> out;
    for (auto span : trainable_views(p)) out.insert(out.end(), span.begin(), span.end());
    return out;
}

void unflatten_params(NetParams& p, const std::vector<double>& flat) {
    std::size_t at = 0;
    for (auto span : trainable_views(p))
        for (double& v : span) v = flat[at++];
}

Verdict criterion1() {
    Rng rng(1001);
    NetParams params = init_params(2, 3, rng);
    for (double& b : params.enc1.b) b = rng.uniform(-0.3, 0.3);
    for (double& b : params.enc2.b) b = rng.uniform(-0.3, 0.3);
    for (double& b : params.dec1.b) b = rng.uniform(-0.3, 0.3);
    for (double& b : params.dec2.b) b = rng.uniform(-0.3, 0.3);
    for (double& g : params.bn.gamma) g = rng.uniform(0.5, 1.5);
    for (double& b : params.bn.beta) b = rng.uniform(-0.4, 0.4);
    const std::size_t B = 6;
    std::vector<int> msgs(B);
    for (int& m : msgs) m = int(rng.next_below(4));
    Matrix mask(B, 3);
    for (double& v : mask.data()) v = rng.next_below(2) ? 1.0 : -1.0;

    NetCache cache;
    net_forward(params, msgs, mask, Phase::continuous, BnMode::train, cache, false);
    Gradients grads(params);
    net_backward(params, cache, cache.u, grads);
    std::vector<double> grad;
    for (auto span : trainable_views(grads)) grad.insert(grad.end(), span.begin(), span.end());
    const std::vector<double> theta = flatten_params(params);

    auto loss_at = [&](const std::vector<double>& flat) {
        NetParams q = params;
        unflatten_params(q, flat);
        NetCache c;
        net_forward(q, msgs, mask, Phase::continuous, BnMode::train, c, false);
        return cross_entropy(c.prob, c.u);
    };

    const double h = 1e-5;
    double max_rel = 0.0;
    Rng dir_rng(1002);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> dir(theta.size());
        double norm = 0.0;
        for (double& d : dir) {
            d = dir_rng.uniform(-1.0, 1.0);
            norm += d * d;
        }
        norm = std::sqrt(norm);
        double analytic = 0.0;
        std::vector<double> tp = theta, tm = theta;
        for (std::size_t i = 0; i < dir.size(); ++i) {
            dir[i] /= norm;
            analytic += grad[i] * dir[i];
            tp[i] += h * dir[i];
            tm[i] -= h * dir[i];
        }
        const double fd = (loss_at(tp) - loss_at(tm)) / (2.0 * h);
        max_rel = std::max(max_rel, std::abs(analytic - fd) / std::max(std::abs(analytic), 1e-8));
    }
    std::ostringstream os;
    os << "analytic vs central differences over 100 random directions, max rel err " << max_rel;
    return {1, max_rel < 1e-5, os.str()};
}

// ---- criterion 2: classical oracle -----------------------------------------

Verdict criterion2() {
    const Codebook cb = hamming74_codebook();
    EvalConfig cfg;
    cfg.p_grid = default_p_grid();
    cfg.trials_per_p = 1000000;
    cfg.seed = 1;
    cfg.pairing = Pairing::hamming_ml;
    const BlerCurve curve = run_bler(cfg, cb, make_ml_decoder(cb));
    double max_z = 0.0;
    for (const BlerPoint& pt : curve.points) {
        const double exact = exact_bler_perfect74(pt.p);
        const double se = std::sqrt(exact * (1.0 - exact) / double(pt.trials));
        max_z = std::max(max_z, std::abs(pt.bler - exact) / se);
    }
    std::ostringstream os;
    os << "monte carlo vs closed form at 10 grid points, 1e6 trials each, max |z| " << max_z;
    return {2, max_z < 4.0, os.str()};
}

// ---- criteria 3..6 share one full-default training run ---------------------

struct Heavy {
    fs::path dir;
    TrainConfig cfg;
    std::optional<TrainOutputs> train;
    std::optional<TrainedModel> reference_decoder;

    const TrainedModel& model() { return train->result.model; }

    void ensure_trained() {
        if (train) return;
        std::cerr << "[acceptance] training with defaults (8 restarts); this takes minutes\n";
        train = run_train_command(cfg, (dir / "run").string(), "acceptance train");
        std::cerr << "[acceptance] training done\n";
    }

    void ensure_reference_decoder() {
        if (reference_decoder) return;
        std::cerr << "[acceptance] training the reference-code decoder\n";
        reference_decoder = train_reference_decoder(cfg);
        std::cerr << "[acceptance] reference decoder done\n";
    }
};

Verdict criterion3(Heavy& heavy) {
    heavy.ensure_trained();
    const StructureReport rep = build_structure_report(heavy.model().codebook);
    const std::vector<double> table1 = {1, 0, 0, 7, 7, 0, 0, 1};
    int successes = 0;
    for (const RestartRecord& r : heavy.train->result.report)
        if (r.d_min == 3 && r.distinct_words == 16) ++successes;
    const bool pass = rep.distinct_words == 16 && rep.d_min == 3 && rep.spectrum.counts == table1 &&
                      rep.is_linear_after_translation && rep.hamming_equivalent && successes >= 1;
    std::ostringstream os;
    os << "distinct " << rep.distinct_words << ", d_min " << rep.d_min << ", spectrum";
    for (double c : rep.spectrum.counts) os << " " << c;
    os << ", linear " << (rep.is_linear_after_translation ? "true" : "false") << ", equivalent "
       << (rep.hamming_equivalent ? "true" : "false") << ", restarts with d_min=3: " << successes << "/"
       << heavy.train->result.report.size();
    return {3, pass, os.str()};
}

Verdict criterion4(Heavy& heavy) {
    heavy.ensure_trained();
    heavy.ensure_reference_decoder();
    const Codebook hamming = hamming74_codebook();
    const Codebook& learned = heavy.model().codebook;

    EvalConfig cfg;
    cfg.p_grid = default_p_grid();
    cfg.trials_per_p = 100000;
    cfg.seed = 1;

    cfg.pairing = Pairing::hamming_ml;
    const BlerCurve baseline = run_bler(cfg, hamming, make_ml_decoder(hamming));

    struct Case {
        const char* label;
        Pairing pairing;
        BlerCurve curve;
    };
    std::vector<Case> cases;
    cfg.pairing = Pairing::aeenc_ml;
    cases.push_back({"aeenc+ml", cfg.pairing, run_bler(cfg, learned, make_ml_decoder(learned))});
    cfg.pairing = Pairing::hamming_aedec;
    cases.push_back(
        {"hamming+aedec", cfg.pairing,
         run_bler(cfg, hamming, make_neural_decoder(heavy.reference_decoder->params))});
    cfg.pairing = Pairing::aeenc_aedec;
    cases.push_back(
        {"aeenc+aedec", cfg.pairing, run_bler(cfg, learned, make_neural_decoder(heavy.model().params))});

    bool pass = true;
    std::ostringstream os;
    os << "vs hamming+ml at 1e5 trials:";
    for (const Case& c : cases) {
        const CurveComparison cmp = compare_curves(c.curve, baseline);
        os << " " << c.label << " max |z| " << cmp.max_abs_z << ";";
        if (cmp.any_exceeds_4) pass = false;
    }
    return {4, pass, os.str()};
}

Verdict criterion5(Heavy& heavy) {
    heavy.ensure_trained();
    const TrainedModel& model = heavy.model();
    const AgreementReport rep = decoder_agreement(model.codebook, make_neural_decoder(model.params));
    const std::size_t agreed = std::size_t(std::lround(rep.agreement * double(rep.words_checked)));
    std::ostringstream os;
    os << "neural decoder vs ML on the learned codebook: " << agreed << "/" << rep.words_checked << " agree";
    if (agreed == rep.words_checked) return {5, true, os.str()};
    if (agreed >= 126) {
        os << " (FLAG: imperfect ML capture, fallback threshold 126/128 applied; disagreements:";
        for (const Disagreement& d : rep.disagreements)
            os << " [" << word_to_string(d.received) << " -> " << d.neural << "]";
        os << ")";
        return {5, true, os.str()};
    }
    os << "; disagreements:";
    for (std::size_t i = 0; i < rep.disagreements.size() && i < 8; ++i)
        os << " [" << word_to_string(rep.disagreements[i].received) << " -> " << rep.disagreements[i].neural
           << "]";
    return {5, false, os.str()};
}

Verdict criterion6(Heavy& heavy) {
    heavy.ensure_trained();
    std::cerr << "[acceptance] replaying the manifest (full retraining)\n";
    const TrainConfig replay_cfg = load_train_config(heavy.train->manifest_path);
    const RestartResult replay = train_with_restarts(replay_cfg);
    const fs::path replay_dir = heavy.dir / "replay";
    fs::create_directories(replay_dir);
    const std::string ckpt = (replay_dir / "model.ckpt").string();
    const std::string cb = (replay_dir / "codebook.txt").string();
    save_checkpoint(replay.model.params, replay.model.phase, ckpt);
    save_codebook(replay.model.codebook, cb);
    const bool ckpt_same = slurp(ckpt) == slurp(heavy.train->checkpoint_path);
    const bool cb_same = slurp(cb) == slurp(heavy.train->codebook_path);
    std::ostringstream os;
    os << "manifest replay: checkpoint " << (ckpt_same ? "bit-identical" : "DIFFERS") << ", codebook "
       << (cb_same ? "bit-identical" : "DIFFERS");
    return {6, ckpt_same && cb_same, os.str()};
}

// ---- criterion 7: property suites ------------------------------------------

bool channel_isomorphism(std::string& err) {
    for (int n = 1; n <= 3; ++n) {
        const int total = 1 << n;
        for (int x = 0; x < total; ++x)
            for (int e = 0; e < total; ++e) {
                std::vector<int> xb(std::size_t(n), 0), eb(std::size_t(n), 0), sb(std::size_t(n), 0);
                for (int i = 0; i < n; ++i) {
                    xb[std::size_t(i)] = (x >> i) & 1;
                    eb[std::size_t(i)] = (e >> i) & 1;
                    sb[std::size_t(i)] = ((x ^ e) >> i) & 1;
                }
                const Word lhs = bits_to_word(sb);
                const Word rhs = bits_to_word(xb) * bits_to_word(eb);
                if (!(lhs == rhs)) {
                    err = "xor/product mismatch at n=" + std::to_string(n);
                    return false;
                }
            }
    }
    return true;
}

bool softmax_shift_invariance(std::string& err) {
    Rng rng(1003);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(16);
        for (double& x : v) x = rng.uniform(-10.0, 10.0);
        const std::vector<double> base = softmax(v);
        for (double c : {1.0, -3.5, 42.0, -100.0}) {
            std::vector<double> shifted = v;
            for (double& x : shifted) x += c;
            const std::vector<double> got = softmax(shifted);
            for (std::size_t i = 0; i < v.size(); ++i)
                if (std::abs(got[i] - base[i]) >= 1e-9) {
                    err = "softmax shift changed a probability by >= 1e-9";
                    return false;
                }
        }
    }
    return true;
}

bool spectrum_oracle(std::string& err) {
    Rng rng(1004);
    for (int rep = 0; rep < 50; ++rep) {
        Codebook cb;
        cb.k = 3;
        cb.n = 6;
        for (int m = 0; m < 8; ++m) {
            std::vector<int> s(6);
            for (int& v : s) v = rng.next_below(2) ? 1 : -1;
            cb.words.emplace_back(std::move(s));
        }
        const DistanceSpectrum got = distance_spectrum(cb);
        std::vector<double> hist(7, 0.0);
        for (const Word& a : cb.words)
            for (const Word& b : cb.words) {
                int d = 0;
                for (std::size_t i = 0; i < 6; ++i)
                    if (a[i] != b[i]) ++d;
                hist[std::size_t(d)] += 1.0;
            }
        for (double& hval : hist) hval /= 8.0;
        if (got.counts != hist) {
            err = "spectrum differs from the pair-loop oracle";
            return false;
        }
    }
    return true;
}

bool adam_two_step(std::string& err) {
    Rng rng(1005);
    NetParams p = init_params(2, 3, rng);
    const double theta0 = p.dec1.w(0, 0);
    const double g = -0.37;
    AdamState s(p, 9e-4);
    Gradients grads(p);
    grads.dec1_w(0, 0) = g;
    adam_step(s, p, grads);
    grads = Gradients(p);
    grads.dec1_w(0, 0) = g;
    adam_step(s, p, grads);
    const double m2 = 0.9 * (0.1 * g) + 0.1 * g;
    const double v2 = 0.999 * (0.001 * g * g) + 0.001 * g * g;
    const double mhat = m2 / (1.0 - 0.9 * 0.9);
    const double vhat = v2 / (1.0 - 0.999 * 0.999);
    const double want = theta0 - 9e-4 * g / (std::abs(g) + 1e-8) - 9e-4 * mhat / (std::sqrt(vhat) + 1e-8);
    if (std::abs(p.dec1.w(0, 0) - want) >= 1e-9) {
        err = "two-step adam trajectory deviates from the closed form";
        return false;
    }
    return true;
}

Verdict criterion7() {
    std::string err;
    if (!channel_isomorphism(err)) return {7, false, err};
    if (!softmax_shift_invariance(err)) return {7, false, err};
    if (!spectrum_oracle(err)) return {7, false, err};
    if (!adam_two_step(err)) return {7, false, err};
    return {7, true,
            "channel isomorphism (exhaustive n<=3), softmax shift-invariance, spectrum pair-loop oracle, "
            "adam two-step closed form"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto selected = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

    Heavy heavy;
    heavy.dir = fs::temp_directory_path() / "binae_acceptance";
    fs::remove_all(heavy.dir);
    fs::create_directories(heavy.dir);
    heavy.cfg = TrainConfig{};  // full-scale defaults

    std::vector<Verdict> verdicts;
    try {
        if (selected(1)) verdicts.push_back(criterion1());
        if (selected(2)) verdicts.push_back(criterion2());
        if (selected(3)) verdicts.push_back(criterion3(heavy));
        if (selected(4)) verdicts.push_back(criterion4(heavy));
        if (selected(5)) verdicts.push_back(criterion5(heavy));
        if (selected(6)) verdicts.push_back(criterion6(heavy));
        if (selected(7)) verdicts.push_back(criterion7());
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance: unhandled exception: " << e.what() << "\n";
        return 1;
    }

    int failures = 0;
    for (const Verdict& v : verdicts) {
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << v.criterion << ": " << v.detail << "\n";
        if (!v.pass) ++failures;
    }
    std::cout << (failures == 0 ? "acceptance: all criteria passed"
                                : "acceptance: " + std::to_string(failures) + " criterion(s) failed")
              << " (" << verdicts.size() << " run)\n";
    return failures == 0 ? 0 : 1;
}
