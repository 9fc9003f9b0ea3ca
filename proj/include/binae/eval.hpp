// Monte Carlo block-error-rate curves for the four encoder/decoder pairings,
// with binomial error bars and per-point z-score comparison.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "binae/autoencoder.hpp"
#include "binae/channel.hpp"
#include "binae/classic.hpp"
#include "binae/errors.hpp"

namespace binae {

namespace stream {
inline constexpr std::uint64_t eval_base = 16;  // + pairing index, then split per p-index
}

enum class Pairing : int { hamming_ml = 0, hamming_aedec = 1, aeenc_ml = 2, aeenc_aedec = 3 };

inline std::string pairing_tag(Pairing p) {
    switch (p) {
        case Pairing::hamming_ml: return "hamming-ml";
        case Pairing::hamming_aedec: return "hamming-aedec";
        case Pairing::aeenc_ml: return "aeenc-ml";
        case Pairing::aeenc_aedec: return "aeenc-aedec";
    }
    throw std::invalid_argument("pairing_tag: unknown pairing");
}

inline Pairing parse_pairing(const std::string& tag) {
    if (tag == "hamming-ml") return Pairing::hamming_ml;
    if (tag == "hamming-aedec") return Pairing::hamming_aedec;
    if (tag == "aeenc-ml") return Pairing::aeenc_ml;
    if (tag == "aeenc-aedec") return Pairing::aeenc_aedec;
    throw ConfigError("unknown pairing '" + tag + "' (expected hamming-ml, hamming-aedec, aeenc-ml, aeenc-aedec)");
}

inline std::vector<double> default_p_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 10; ++i) g.push_back(double(i) * 0.01);
    return g;
}

struct EvalConfig {
    std::vector<double> p_grid = default_p_grid();
    std::size_t trials_per_p = 1000000;
    std::uint64_t seed = 1;
    Pairing pairing = Pairing::hamming_ml;

    void validate() const {
        if (p_grid.empty()) throw ConfigError("eval config: empty p grid");
        for (double p : p_grid)
            if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("eval config: grid p outside [0,1]");
        if (trials_per_p < 1) throw ConfigError("eval config: trials_per_p must be >= 1");
    }
};

struct BlerPoint {
    double p = 0.0;
    double bler = 0.0;
    double se = 0.0;
    std::size_t trials = 0;
    std::size_t errors = 0;
};

struct BlerCurve {
    Pairing pairing = Pairing::hamming_ml;
    std::uint64_t seed = 0;
    std::vector<BlerPoint> points;
};

inline std::function<int(const Word&)> make_ml_decoder(const Codebook& cb) {
    return [cb](const Word& y) { return ml_decode(y, cb); };
}

inline std::function<int(const Word&)> make_neural_decoder(const NetParams& params) {
    auto y = std::make_shared<std::vector<double>>(std::size_t(params.n));
    auto d1 = std::make_shared<std::vector<double>>();
    auto logits = std::make_shared<std::vector<double>>();
    return [params, y, d1, logits](const Word& w) {
        if (w.size() != std::size_t(params.n)) throw std::invalid_argument("neural decoder: word length != n");
        for (int j = 0; j < params.n; ++j) (*y)[std::size_t(j)] = double(w[std::size_t(j)]);
        return decode_argmax_single(params, y->data(), *d1, *logits);
    };
}

// For each grid point: uniform messages through the codebook encoder, the
// BSC, and the supplied decision function. Each p-index owns its own split
// random stream, so grid points are independent and the curve is bit-stable
// regardless of evaluation order.
inline BlerCurve run_bler(const EvalConfig& cfg, const Codebook& encoder, const std::function<int(const Word&)>& decode) {
    cfg.validate();
    if (encoder.words.empty()) throw std::invalid_argument("run_bler: empty codebook");
    const std::uint64_t M = encoder.words.size();
    BlerCurve curve;
    curve.pairing = cfg.pairing;
    curve.seed = cfg.seed;
    Rng proot = Rng(cfg.seed).split(stream::eval_base + std::uint64_t(static_cast<int>(cfg.pairing)));
    for (std::size_t i = 0; i < cfg.p_grid.size(); ++i) {
        const double p = cfg.p_grid[i];
        const BscParams ch(p);
        Rng rng = proot.split(i);
        std::size_t errors = 0;
        for (std::size_t t = 0; t < cfg.trials_per_p; ++t) {
            const int m = int(rng.next_below(M));
            const Word y = bsc_apply(encoder.words[std::size_t(m)], ch, rng);
            errors += decode(y) != m;
        }
        BlerPoint pt;
        pt.p = p;
        pt.trials = cfg.trials_per_p;
        pt.errors = errors;
        pt.bler = double(errors) / double(cfg.trials_per_p);
        pt.se = std::sqrt(pt.bler * (1.0 - pt.bler) / double(cfg.trials_per_p));
        curve.points.push_back(pt);
    }
    return curve;
}

struct ComparisonRow {
    double p = 0.0;
    double bler_a = 0.0;
    double bler_b = 0.0;
    double z = 0.0;
};

struct CurveComparison {
    std::vector<ComparisonRow> rows;
    double max_abs_z = 0.0;
    double max_ratio = 1.0;  // over points where both estimates are positive
    bool any_exceeds_4 = false;
};

inline CurveComparison compare_curves(const BlerCurve& a, const BlerCurve& b) {
    if (a.points.size() != b.points.size()) throw std::invalid_argument("compare_curves: grid size mismatch");
    CurveComparison cmp;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].p != b.points[i].p) throw std::invalid_argument("compare_curves: p grids differ");
        ComparisonRow row;
        row.p = a.points[i].p;
        row.bler_a = a.points[i].bler;
        row.bler_b = b.points[i].bler;
        const double denom = std::sqrt(a.points[i].se * a.points[i].se + b.points[i].se * b.points[i].se);
        const double diff = row.bler_a - row.bler_b;
        if (denom == 0.0)
            row.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        else
            row.z = diff / denom;
        cmp.rows.push_back(row);
        cmp.max_abs_z = std::max(cmp.max_abs_z, std::abs(row.z));
        if (row.bler_a > 0.0 && row.bler_b > 0.0)
            cmp.max_ratio = std::max(cmp.max_ratio, std::max(row.bler_a / row.bler_b, row.bler_b / row.bler_a));
    }
    cmp.any_exceeds_4 = cmp.max_abs_z > 4.0;
    return cmp;
}

inline std::string curve_filename(Pairing pairing, std::uint64_t seed) {
    return "bler_" + pairing_tag(pairing) + "_seed" + std::to_string(seed) + ".csv";
}

inline void save_curve_csv(const BlerCurve& curve, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("save_curve_csv: cannot open " + path);
    f << "p,bler,se,trials,errors\n";
    f.precision(17);
    for (const BlerPoint& pt : curve.points)
        f << pt.p << "," << pt.bler << "," << pt.se << "," << pt.trials << "," << pt.errors << "\n";
    if (!f) throw ArtifactError("save_curve_csv: write failed on " + path);
}

inline BlerCurve load_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ArtifactError("load_curve_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "p,bler,se,trials,errors")
        throw ArtifactError("load_curve_csv: bad header in " + path);
    BlerCurve curve;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        BlerPoint pt;
        char c1, c2, c3, c4;
        if (!(ss >> pt.p >> c1 >> pt.bler >> c2 >> pt.se >> c3 >> pt.trials >> c4 >> pt.errors) || c1 != ',' ||
            c2 != ',' || c3 != ',' || c4 != ',')
            throw ArtifactError("load_curve_csv: bad row '" + line + "' in " + path);
        curve.points.push_back(pt);
    }
    if (curve.points.empty()) throw ArtifactError("load_curve_csv: no data rows in " + path);
    return curve;
}

}  // namespace binae
