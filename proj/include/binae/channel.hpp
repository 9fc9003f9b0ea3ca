// Binary symmetric channel, sign binarizer, and the {0,1} <-> {-1,+1} bridge.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "binae/numerics.hpp"

namespace binae {

struct BscParams {
    double p = 0.0;  // crossover probability

    explicit BscParams(double crossover) : p(crossover) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("BscParams: p outside [0,1]");
    }
};

// Length-n transmit word over {-1,+1}. ||x||^2 = n holds by construction.
struct Word {
    std::vector<int> symbols;

    Word() = default;
    explicit Word(std::vector<int> s) : symbols(std::move(s)) {
        for (int v : symbols)
            if (v != -1 && v != 1) throw std::invalid_argument("Word: symbol outside {-1,+1}");
    }

    std::size_t size() const { return symbols.size(); }
    int operator[](std::size_t i) const { return symbols[i]; }
    bool operator==(const Word& o) const { return symbols == o.symbols; }

    // Elementwise product; the group operation of the +-1 representation.
    Word operator*(const Word& o) const {
        if (symbols.size() != o.symbols.size()) throw std::invalid_argument("Word product: length mismatch");
        Word r;
        r.symbols.resize(symbols.size());
        for (std::size_t i = 0; i < symbols.size(); ++i) r.symbols[i] = symbols[i] * o.symbols[i];
        return r;
    }
};

// y = x (.) z with z_i = -1 w.p. p, +1 otherwise, i.i.d.
inline Word bsc_apply(const Word& x, const BscParams& ch, Rng& rng) {
    Word y;
    y.symbols.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool flip = rng.next_double() < ch.p;
        y.symbols[i] = flip ? -x[i] : x[i];
    }
    return y;
}

// Componentwise sign with sign(0) = +1.
inline Word binarize(const std::vector<double>& x) {
    Word w;
    w.symbols.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i])) throw std::invalid_argument("binarize: NaN input");
        w.symbols[i] = x[i] < 0.0 ? -1 : 1;
    }
    return w;
}

// One crossover probability p ~ uniform[p_lo, p_hi] is drawn per batch, then
// an independent mask per sample with that p.
inline std::vector<Word> sample_mask_batch(std::size_t batch, std::size_t n, double p_lo, double p_hi, Rng& rng) {
    if (!(0.0 <= p_lo && p_lo <= p_hi && p_hi <= 1.0))
        throw std::invalid_argument("sample_mask_batch: need 0 <= p_lo <= p_hi <= 1");
    const double p = rng.uniform(p_lo, p_hi);
    std::vector<Word> masks;
    masks.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        Word m;
        m.symbols.resize(n);
        for (std::size_t i = 0; i < n; ++i) m.symbols[i] = rng.next_double() < p ? -1 : 1;
        masks.push_back(std::move(m));
    }
    return masks;
}

// Bit b maps to 1-2b, so XOR of bit vectors corresponds to the elementwise
// product of words.
inline Word bits_to_word(const std::vector<int>& bits) {
    Word w;
    w.symbols.resize(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1) throw std::invalid_argument("bits_to_word: entry outside {0,1}");
        w.symbols[i] = 1 - 2 * bits[i];
    }
    return w;
}

inline std::vector<int> word_to_bits(const Word& w) {
    std::vector<int> bits(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) bits[i] = (1 - w[i]) / 2;
    return bits;
}

}  // namespace binae
