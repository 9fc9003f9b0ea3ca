// End-to-end model and the two-phase training procedure: continuous
// pretraining with mask noise, then hard sign binarization of the encoder
// output with decoder-only fine-tuning. Includes the multi-restart policy
// that guards against the known d_min = 2 local optimum.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "binae/analysis.hpp"
#include "binae/channel.hpp"
#include "binae/classic.hpp"
#include "binae/errors.hpp"
#include "binae/nn.hpp"
#include "binae/numerics.hpp"

namespace binae {

// Purpose tags for the per-run random streams. Splitting by fixed tag keeps
// data generation, initialization, channel noise, and validation independent
// of one another and of evaluation order.
namespace stream {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t channel = 3;
inline constexpr std::uint64_t history_val = 4;
inline constexpr std::uint64_t selection_val = 5;
}  // namespace stream

struct TrainConfig {
    int k = 4;
    int n = 7;
    int epochs_total = 150;
    int epochs_continuous = 95;
    int batch_size = 10;
    double lr = 9e-4;
    double mask_p_lo = 0.06;
    double mask_p_hi = 0.1;
    std::size_t train_samples = 100000;
    std::size_t test_samples = 1000000;
    int restarts = 8;
    std::uint64_t seed = 1;

    // model-selection validation channel (midpoint of the training mask range)
    double val_p = 0.08;
    std::size_t val_trials = 100000;
    std::size_t history_val_trials = 10000;

    int M() const { return 1 << k; }

    void validate() const {
        if (k < 1 || k > 16) throw ConfigError("config: k must be in [1,16]");
        if (n < 1 || n > 4096) throw ConfigError("config: n must be in [1,4096]");
        if (epochs_continuous < 0) throw ConfigError("config: epochs_continuous must be >= 0");
        if (epochs_total <= epochs_continuous)
            throw ConfigError("config: epochs_total must exceed epochs_continuous");
        if (batch_size < 2) throw ConfigError("config: batch_size must be >= 2 (batch norm)");
        if (!(0.0 <= mask_p_lo && mask_p_lo <= mask_p_hi && mask_p_hi <= 1.0))
            throw ConfigError("config: need 0 <= mask_p_lo <= mask_p_hi <= 1");
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("config: lr must be positive and finite");
        if (train_samples < std::size_t(batch_size))
            throw ConfigError("config: train_samples must be >= batch_size");
        if (test_samples < 1) throw ConfigError("config: test_samples must be >= 1");
        if (restarts < 1) throw ConfigError("config: restarts must be >= 1");
        if (!(0.0 <= val_p && val_p <= 1.0)) throw ConfigError("config: val_p outside [0,1]");
        if (val_trials < 1) throw ConfigError("config: val_trials must be >= 1");
        if (history_val_trials < 1) throw ConfigError("config: history_val_trials must be >= 1");
    }
};

struct EpochRecord {
    int epoch = 0;  // 0 = pre-training snapshot
    Phase phase = Phase::continuous;
    double mean_loss = 0.0;
    double val_bler = 0.0;
};

struct TrainedModel {
    NetParams params;
    Codebook codebook;
    TrainConfig config;
    Phase phase = Phase::binarized;
    std::vector<EpochRecord> history;

    // state captured when the phase switched, for invariant checks
    NetParams params_at_switch;
    Codebook codebook_at_switch;
};

// Encoder forward in eval mode (frozen running batch-norm statistics).
// Continuous phase yields tanh outputs strictly inside (-1,1); binarized
// phase applies sign on top.
inline Matrix encode_forward(const NetParams& p, const std::vector<int>& msgs, Phase phase) {
    for (int m : msgs)
        if (m < 0 || m >= p.M) throw std::invalid_argument("encode_forward: message id out of range");
    const std::size_t B = msgs.size();
    Matrix h1(B, p.M);
    for (std::size_t b = 0; b < B; ++b)
        for (int o = 0; o < p.M; ++o) h1(b, std::size_t(o)) = p.enc1.w(std::size_t(o), msgs[b]) + p.enc1.b[o];
    Matrix h2 = dense_forward(p.enc2, h1);
    Matrix x(B, p.n);
    for (std::size_t b = 0; b < B; ++b)
        for (int j = 0; j < p.n; ++j) {
            const double z = p.bn.gamma[j] * (h2(b, j) - p.bn.running_mean[j]) /
                                 std::sqrt(p.bn.running_var[j] + p.bn.eps) +
                             p.bn.beta[j];
            const double t = std::tanh(z);
            x(b, std::size_t(j)) = (phase == Phase::binarized) ? (t < 0.0 ? -1.0 : 1.0) : t;
        }
    return x;
}

// Decoder forward: two dense layers then a row softmax.
inline Matrix decode_forward(const NetParams& p, const Matrix& y) {
    if (y.cols() != std::size_t(p.n)) throw std::invalid_argument("decode_forward: input width != n");
    Matrix d1 = dense_forward(p.dec1, y);
    Matrix prob = dense_forward(p.dec2, d1);
    for (std::size_t b = 0; b < prob.rows(); ++b) softmax_in_place(prob.row(b));
    return prob;
}

inline Matrix decode_forward(const NetParams& p, const std::vector<Word>& ys) {
    Matrix y(ys.size(), p.n);
    for (std::size_t b = 0; b < ys.size(); ++b) {
        if (ys[b].size() != std::size_t(p.n)) throw std::invalid_argument("decode_forward: word length != n");
        for (int j = 0; j < p.n; ++j) y(b, std::size_t(j)) = double(ys[b][j]);
    }
    return decode_forward(p, y);
}

// Hard decisions: argmax per row, ties to the lowest index.
inline std::vector<int> argmax_rows(const Matrix& prob) {
    std::vector<int> ids(prob.rows());
    for (std::size_t b = 0; b < prob.rows(); ++b) {
        const auto r = prob.row(b);
        std::size_t best = 0;
        for (std::size_t i = 1; i < r.size(); ++i)
            if (r[i] > r[best]) best = i;
        ids[b] = int(best);
    }
    return ids;
}

// Single-sample decoder decision without allocation; softmax is monotone so
// the argmax is taken over the logits directly.
inline int decode_argmax_single(const NetParams& p, const double* y, std::vector<double>& d1,
                                std::vector<double>& logits) {
    d1.resize(std::size_t(p.M));
    logits.resize(std::size_t(p.M));
    for (int o = 0; o < p.M; ++o) {
        double acc = p.dec1.b[o];
        const auto w = p.dec1.w.row(std::size_t(o));
        for (int j = 0; j < p.n; ++j) acc += w[j] * y[j];
        d1[o] = acc;
    }
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int o = 0; o < p.M; ++o) {
        double acc = p.dec2.b[o];
        const auto w = p.dec2.w.row(std::size_t(o));
        for (int i = 0; i < p.M; ++i) acc += w[i] * d1[std::size_t(i)];
        logits[std::size_t(o)] = acc;
        if (acc > best_v) {
            best_v = acc;
            best = o;
        }
    }
    return best;
}

// The learned code: eval-mode encoder output for every message, binarized,
// in message order. Duplicates are permitted here; count_distinct_words
// reports them.
inline Codebook extract_codebook(const NetParams& p) {
    std::vector<int> msgs(std::size_t(p.M));
    std::iota(msgs.begin(), msgs.end(), 0);
    const Matrix x = encode_forward(p, msgs, Phase::binarized);
    Codebook cb;
    cb.k = p.k;
    cb.n = p.n;
    cb.words.reserve(std::size_t(p.M));
    for (std::size_t b = 0; b < x.rows(); ++b) {
        std::vector<double> row(x.row(b).begin(), x.row(b).end());
        cb.words.push_back(binarize(row));
    }
    return cb;
}

inline std::size_t count_distinct_words(const Codebook& cb) {
    std::vector<std::vector<int>> s;
    s.reserve(cb.words.size());
    for (const Word& w : cb.words) s.push_back(w.symbols);
    std::sort(s.begin(), s.end());
    return std::size_t(std::distance(s.begin(), std::unique(s.begin(), s.end())));
}

// Monte Carlo block error rate of the fixed codebook under the model's
// decoder across a BSC with crossover probability chan_p.
inline double decoder_bler(const NetParams& p, const Codebook& cb, double chan_p, std::size_t trials, Rng& rng) {
    if (cb.n != p.n || cb.words.size() != std::size_t(p.M))
        throw std::invalid_argument("decoder_bler: codebook incompatible with params");
    if (!(chan_p >= 0.0 && chan_p <= 1.0)) throw std::invalid_argument("decoder_bler: p outside [0,1]");
    std::vector<double> y(std::size_t(p.n)), d1, logits;
    std::size_t errors = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const int m = int(rng.next_below(std::uint64_t(p.M)));
        const Word& x = cb.words[std::size_t(m)];
        for (int j = 0; j < p.n; ++j) y[std::size_t(j)] = rng.next_double() < chan_p ? -x[std::size_t(j)] : x[std::size_t(j)];
        errors += decode_argmax_single(p, y.data(), d1, logits) != m;
    }
    return double(errors) / double(trials);
}

namespace detail {

inline void mask_to_matrix(const std::vector<Word>& masks, Matrix& out) {
    const std::size_t B = masks.size(), n = masks.empty() ? 0 : masks[0].size();
    if (out.rows() != B || out.cols() != n) out = Matrix(B, n);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < n; ++j) out(b, j) = double(masks[b][j]);
}

// Mean loss over the full training set without parameter updates; used for
// the epoch-0 history row. Clean channel (all-ones mask), batch statistics,
// running stats untouched.
inline double snapshot_loss(NetParams& p, const std::vector<int>& dataset, int batch_size, Phase phase,
                            NetCache& cache) {
    const std::size_t steps = dataset.size() / std::size_t(batch_size);
    Matrix ones(std::size_t(batch_size), std::size_t(p.n));
    for (double& v : ones.data()) v = 1.0;
    std::vector<int> batch(std::size_t(batch_size), 0);
    double total = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        for (int b = 0; b < batch_size; ++b) batch[std::size_t(b)] = dataset[s * std::size_t(batch_size) + std::size_t(b)];
        const BnMode mode = (phase == Phase::continuous) ? BnMode::train : BnMode::eval;
        net_forward(p, batch, ones, phase, mode, cache, /*update_running=*/false);
        total += cross_entropy(cache.prob, cache.u);
    }
    return total / double(steps);
}

}  // namespace detail

// Two-phase training. Epochs 1..epochs_continuous run the continuous model
// with train-mode batch norm and full Adam updates; afterwards the encoder
// output is binarized, running statistics are frozen, and only the decoder
// continues to learn. Deterministic for a fixed config.
inline TrainedModel train(const TrainConfig& cfg) {
    cfg.validate();
    Rng root(cfg.seed);
    Rng data_rng = root.split(stream::data);
    Rng init_rng = root.split(stream::init);
    Rng chan_rng = root.split(stream::channel);
    Rng hist_rng = root.split(stream::history_val);

    TrainedModel out;
    out.config = cfg;
    out.params = init_params(cfg.k, cfg.n, init_rng);
    NetParams& p = out.params;
    AdamState adam(p, cfg.lr);
    Gradients grads(p);
    NetCache cache;

    // message ids drawn uniformly with replacement, regenerated once per run
    std::vector<int> dataset(cfg.train_samples);
    for (int& m : dataset) m = int(data_rng.next_below(std::uint64_t(cfg.M())));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t steps = dataset.size() / std::size_t(cfg.batch_size);

    const Phase first_phase = cfg.epochs_continuous > 0 ? Phase::continuous : Phase::binarized;
    out.history.push_back({0, first_phase, detail::snapshot_loss(p, dataset, cfg.batch_size, first_phase, cache),
                           decoder_bler(p, extract_codebook(p), cfg.val_p, cfg.history_val_trials, hist_rng)});

    std::vector<int> batch(std::size_t(cfg.batch_size), 0);
    Matrix mask;
    if (cfg.epochs_continuous == 0) {
        out.params_at_switch = p;
        out.codebook_at_switch = extract_codebook(p);
    }
    for (int epoch = 1; epoch <= cfg.epochs_total; ++epoch) {
        const Phase phase = epoch <= cfg.epochs_continuous ? Phase::continuous : Phase::binarized;
        // Fisher-Yates pass over the sample order
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = data_rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            for (int b = 0; b < cfg.batch_size; ++b)
                batch[std::size_t(b)] = dataset[order[s * std::size_t(cfg.batch_size) + std::size_t(b)]];
            const std::vector<Word> masks =
                sample_mask_batch(std::size_t(cfg.batch_size), std::size_t(cfg.n), cfg.mask_p_lo, cfg.mask_p_hi, chan_rng);
            detail::mask_to_matrix(masks, mask);
            const bool continuous = phase == Phase::continuous;
            double loss = 0.0;
            try {
                net_forward(p, batch, mask, phase, continuous ? BnMode::train : BnMode::eval, cache,
                            /*update_running=*/continuous);
                loss = cross_entropy(cache.prob, cache.u);
            } catch (const std::invalid_argument&) {
                // shapes are fixed by now, so this can only be a numerical blowup
                throw TrainingDiverged(epoch);
            }
            if (!std::isfinite(loss)) throw TrainingDiverged(epoch);
            epoch_loss += loss;
            net_backward(p, cache, cache.u, grads);
            adam_step(adam, p, grads, continuous ? UpdateScope::continuous : UpdateScope::decoder_only);
        }
        out.history.push_back({epoch, phase, epoch_loss / double(steps),
                               decoder_bler(p, extract_codebook(p), cfg.val_p, cfg.history_val_trials, hist_rng)});
        if (epoch == cfg.epochs_continuous) {
            out.params_at_switch = p;
            out.codebook_at_switch = extract_codebook(p);
        }
    }
    out.codebook = extract_codebook(p);
    out.phase = Phase::binarized;
    return out;
}

struct RestartRecord {
    int restart = 0;
    std::uint64_t seed = 0;
    int d_min = 0;
    std::size_t distinct_words = 0;
    double val_bler = 1.0;
    bool selected = false;
};

struct RestartResult {
    TrainedModel model;
    std::vector<RestartRecord> report;
};

// Runs train with seeds seed, seed+1, ... and keeps the model maximizing
// (d_min, then lowest validation BLER at val_p, then lowest restart index).
// Different runs land in different local optima; the d_min = 2 outcome is the
// known failure mode this policy filters out.
inline RestartResult train_with_restarts(const TrainConfig& cfg) {
    cfg.validate();
    RestartResult res;
    int best = -1;
    for (int r = 0; r < cfg.restarts; ++r) {
        TrainConfig c = cfg;
        c.seed = cfg.seed + std::uint64_t(r);
        TrainedModel model = train(c);
        Rng val_rng = Rng(c.seed).split(stream::selection_val);
        RestartRecord rec;
        rec.restart = r;
        rec.seed = c.seed;
        rec.d_min = min_distance(model.codebook);
        rec.distinct_words = count_distinct_words(model.codebook);
        rec.val_bler = decoder_bler(model.params, model.codebook, cfg.val_p, cfg.val_trials, val_rng);
        res.report.push_back(rec);
        const bool better = best < 0 || rec.d_min > res.report[std::size_t(best)].d_min ||
                            (rec.d_min == res.report[std::size_t(best)].d_min &&
                             rec.val_bler < res.report[std::size_t(best)].val_bler);
        if (better) {
            best = r;
            res.model = std::move(model);
        }
    }
    res.report[std::size_t(best)].selected = true;
    return res;
}

// Decoder-only supervised training against a fixed codebook: the encoder
// weights are constructed so that eval-mode extraction reproduces the given
// codebook exactly, then the standard binarized-phase loop trains the decoder
// from scratch. This realizes pairings of a classical encoder with the
// neural decoder.
inline NetParams embed_codebook(const Codebook& cb, Rng& init_rng) {
    NetParams p = init_params(cb.k, cb.n, init_rng);  // decoder init; encoder overwritten below
    for (int o = 0; o < p.M; ++o) {
        for (int i = 0; i < p.M; ++i) p.enc1.w(std::size_t(o), std::size_t(i)) = o == i ? 1.0 : 0.0;
        p.enc1.b[std::size_t(o)] = 0.0;
    }
    // scale 3: tanh(~3) saturates near +-1 and sign recovers the word exactly
    for (int j = 0; j < p.n; ++j) {
        for (int m = 0; m < p.M; ++m) p.enc2.w(std::size_t(j), std::size_t(m)) = 3.0 * double(cb.words[std::size_t(m)][std::size_t(j)]);
        p.enc2.b[std::size_t(j)] = 0.0;
        p.bn.gamma[std::size_t(j)] = 1.0;
        p.bn.beta[std::size_t(j)] = 0.0;
        p.bn.running_mean[std::size_t(j)] = 0.0;
        p.bn.running_var[std::size_t(j)] = 1.0;
    }
    return p;
}

inline TrainedModel train_decoder_on_codebook(const TrainConfig& cfg, const Codebook& cb) {
    cfg.validate();
    if (cb.k != cfg.k || cb.n != cfg.n) throw ConfigError("train_decoder_on_codebook: codebook shape != config");
    Rng root(cfg.seed);
    Rng data_rng = root.split(stream::data);
    Rng init_rng = root.split(stream::init);
    Rng chan_rng = root.split(stream::channel);
    Rng hist_rng = root.split(stream::history_val);

    TrainedModel out;
    out.config = cfg;
    out.params = embed_codebook(cb, init_rng);
    NetParams& p = out.params;
    AdamState adam(p, cfg.lr);
    Gradients grads(p);
    NetCache cache;

    std::vector<int> dataset(cfg.train_samples);
    for (int& m : dataset) m = int(data_rng.next_below(std::uint64_t(cfg.M())));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t steps = dataset.size() / std::size_t(cfg.batch_size);

    out.params_at_switch = p;
    out.codebook_at_switch = extract_codebook(p);
    out.history.push_back({0, Phase::binarized, detail::snapshot_loss(p, dataset, cfg.batch_size, Phase::binarized, cache),
                           decoder_bler(p, out.codebook_at_switch, cfg.val_p, cfg.history_val_trials, hist_rng)});

    std::vector<int> batch(std::size_t(cfg.batch_size), 0);
    Matrix mask;
    for (int epoch = 1; epoch <= cfg.epochs_total; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = data_rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            for (int b = 0; b < cfg.batch_size; ++b)
                batch[std::size_t(b)] = dataset[order[s * std::size_t(cfg.batch_size) + std::size_t(b)]];
            const std::vector<Word> masks =
                sample_mask_batch(std::size_t(cfg.batch_size), std::size_t(cfg.n), cfg.mask_p_lo, cfg.mask_p_hi, chan_rng);
            detail::mask_to_matrix(masks, mask);
            double loss = 0.0;
            try {
                net_forward(p, batch, mask, Phase::binarized, BnMode::eval, cache, /*update_running=*/false);
                loss = cross_entropy(cache.prob, cache.u);
            } catch (const std::invalid_argument&) {
                throw TrainingDiverged(epoch);
            }
            if (!std::isfinite(loss)) throw TrainingDiverged(epoch);
            epoch_loss += loss;
            net_backward(p, cache, cache.u, grads);
            adam_step(adam, p, grads, UpdateScope::decoder_only);
        }
        out.history.push_back({epoch, Phase::binarized, epoch_loss / double(steps),
                               decoder_bler(p, cb, cfg.val_p, cfg.history_val_trials, hist_rng)});
    }
    out.codebook = extract_codebook(p);
    out.phase = Phase::binarized;
    return out;
}

// Training history as CSV: epoch, phase, mean_loss, val_bler.
inline void save_history_csv(const TrainedModel& model, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("save_history_csv: cannot open " + path);
    f << "epoch,phase,mean_loss,val_bler\n";
    f.precision(17);
    for (const EpochRecord& r : model.history)
        f << r.epoch << "," << (r.phase == Phase::continuous ? "continuous" : "binarized") << "," << r.mean_loss
          << "," << r.val_bler << "\n";
    if (!f) throw ArtifactError("save_history_csv: write failed on " + path);
}

}  // namespace binae
