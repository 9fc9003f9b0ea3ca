// Reference Hamming(7,4) code, exhaustive ML decoding, and the exact BLER
// closed form for the perfect single-error-correcting case.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "binae/channel.hpp"
#include "binae/errors.hpp"

namespace binae {

// Ordered set of M = 2^k codewords; index = message id.
struct Codebook {
    int k = 0;
    int n = 0;
    std::vector<Word> words;

    std::size_t size() const { return words.size(); }
};

// Systematic generator [I_k | P] over GF(2), one row per message bit.
struct GeneratorMatrix {
    int k = 0;
    int n = 0;
    std::vector<std::vector<int>> rows;  // k rows of n bits

    std::vector<int> encode(const std::vector<int>& message_bits) const {
        if (static_cast<int>(message_bits.size()) != k) throw std::invalid_argument("encode: need k message bits");
        std::vector<int> c(n, 0);
        for (int i = 0; i < k; ++i) {
            if (message_bits[i] == 0) continue;
            if (message_bits[i] != 1) throw std::invalid_argument("encode: bits must be 0/1");
            for (int j = 0; j < n; ++j) c[j] ^= rows[i][j];
        }
        return c;
    }
};

// Fixed parity assignment: data bit i feeds the checks listed in row i of P.
inline GeneratorMatrix hamming74_generator() {
    GeneratorMatrix g;
    g.k = 4;
    g.n = 7;
    const int parity[4][3] = {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
    for (int i = 0; i < 4; ++i) {
        std::vector<int> row(7, 0);
        row[i] = 1;
        for (int j = 0; j < 3; ++j) row[4 + j] = parity[i][j];
        g.rows.push_back(row);
    }
    return g;
}

// Message id bits are taken least-significant first: id 1 -> d = (1,0,0,0).
inline std::vector<int> message_bits(int id, int k) {
    std::vector<int> bits(k);
    for (int i = 0; i < k; ++i) bits[i] = (id >> i) & 1;
    return bits;
}

inline int bits_message(const std::vector<int>& bits) {
    int id = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) id |= bits[i] << i;
    return id;
}

inline Codebook hamming74_codebook() {
    const GeneratorMatrix g = hamming74_generator();
    Codebook cb;
    cb.k = g.k;
    cb.n = g.n;
    cb.words.reserve(16);
    for (int m = 0; m < 16; ++m) cb.words.push_back(bits_to_word(g.encode(message_bits(m, 4))));
    return cb;
}

inline int hamming_distance(const Word& a, const Word& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

// Exhaustive minimum-distance decoding; ties broken by lowest message index.
inline int ml_decode(const Word& y, const Codebook& cb) {
    if (y.size() != static_cast<std::size_t>(cb.n)) throw std::invalid_argument("ml_decode: word length != n");
    int best = 0;
    int best_d = hamming_distance(y, cb.words[0]);
    for (std::size_t m = 1; m < cb.words.size(); ++m) {
        const int d = hamming_distance(y, cb.words[m]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(m);
        }
    }
    return best;
}

// All message ids attaining the minimum distance, ascending.
inline std::vector<int> ml_decode_set(const Word& y, const Codebook& cb) {
    int best_d = cb.n + 1;
    std::vector<int> mins;
    for (std::size_t m = 0; m < cb.words.size(); ++m) {
        const int d = hamming_distance(y, cb.words[m]);
        if (d < best_d) {
            best_d = d;
            mins.clear();
        }
        if (d == best_d) mins.push_back(static_cast<int>(m));
    }
    return mins;
}

// Block error rate of a perfect single-error-correcting (7,4) code under ML:
// exactly the probability of two or more crossovers.
inline double exact_bler_perfect74(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("exact_bler_perfect74: p outside [0,1]");
    const double q = 1.0 - p;
    return 1.0 - std::pow(q, 7) - 7.0 * p * std::pow(q, 6);
}

// Text format: header "k n", then one line per codeword with "+1"/"-1"
// symbols, space-separated, in message-index order.
inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("save_codebook: cannot open " + path);
    f << cb.k << " " << cb.n << "\n";
    for (const Word& w : cb.words) {
        for (std::size_t i = 0; i < w.size(); ++i) f << (i ? " " : "") << (w[i] > 0 ? "+1" : "-1");
        f << "\n";
    }
    if (!f) throw ArtifactError("save_codebook: write failed on " + path);
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ArtifactError("load_codebook: cannot open " + path);
    Codebook cb;
    if (!(f >> cb.k >> cb.n) || cb.k < 1 || cb.n < 1) throw ArtifactError("load_codebook: bad header in " + path);
    const std::size_t M = std::size_t{1} << cb.k;
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<int> symbols(cb.n);
        for (int i = 0; i < cb.n; ++i) {
            std::string tok;
            if (!(f >> tok)) throw ArtifactError("load_codebook: truncated file " + path);
            if (tok == "+1")
                symbols[i] = 1;
            else if (tok == "-1")
                symbols[i] = -1;
            else
                throw ArtifactError("load_codebook: bad symbol '" + tok + "' in " + path);
        }
        Word w;
        w.symbols = std::move(symbols);
        cb.words.push_back(std::move(w));
    }
    return cb;
}

}  // namespace binae
