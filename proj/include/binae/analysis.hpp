// Algebraic characterization of a codebook: distance spectrum, linearity up
// to translation, equivalence with the reference Hamming(7,4) code under
// translation plus coordinate permutation, and exhaustive decoder comparison
// against maximum-likelihood decoding.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "binae/classic.hpp"
#include "binae/errors.hpp"

namespace binae {

// counts[d] = average over codewords of the number of codewords (self
// included) at Hamming distance d. Sums to M; for a linear code this equals
// the weight distribution.
struct DistanceSpectrum {
    std::vector<double> counts;

    bool operator==(const DistanceSpectrum& o) const { return counts == o.counts; }
};

inline DistanceSpectrum distance_spectrum(const Codebook& cb) {
    DistanceSpectrum s;
    s.counts.assign(std::size_t(cb.n) + 1, 0.0);
    for (const Word& a : cb.words)
        for (const Word& b : cb.words) s.counts[std::size_t(hamming_distance(a, b))] += 1.0;
    for (double& c : s.counts) c /= double(cb.words.size());
    return s;
}

// Minimum pairwise Hamming distance over distinct index pairs; 0 signals
// duplicate codewords.
inline int min_distance(const Codebook& cb) {
    if (cb.words.size() < 2) throw std::invalid_argument("min_distance: need at least two codewords");
    int best = cb.n;
    for (std::size_t a = 0; a + 1 < cb.words.size(); ++a)
        for (std::size_t b = a + 1; b < cb.words.size(); ++b)
            best = std::min(best, hamming_distance(cb.words[a], cb.words[b]));
    return best;
}

struct LinearityResult {
    bool is_linear = false;
    Word translation;  // the codeword used to translate (maps itself to all-ones)
};

// Translate the codebook by its first word, then check closure of the
// translated set under the elementwise product, exhaustively over all pairs.
// In the +-1 representation the all-ones word is the group identity, so a
// closed translated set containing it is a linear code and the original is
// one of its cosets. Duplicated codewords fail the check outright.
inline LinearityResult check_linearity(const Codebook& cb) {
    if (cb.words.empty()) throw std::invalid_argument("check_linearity: empty codebook");
    LinearityResult res;
    res.translation = cb.words[0];
    std::vector<std::vector<int>> set;
    set.reserve(cb.words.size());
    for (const Word& w : cb.words) set.push_back((w * res.translation).symbols);
    std::sort(set.begin(), set.end());
    if (std::adjacent_find(set.begin(), set.end()) != set.end()) return res;  // duplicates
    const std::vector<int> ones(std::size_t(cb.n), 1);
    if (!std::binary_search(set.begin(), set.end(), ones)) return res;
    std::vector<int> prod(std::size_t(cb.n));
    for (const auto& a : set)
        for (const auto& b : set) {
            for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a[i] * b[i];
            if (!std::binary_search(set.begin(), set.end(), prod)) return res;
        }
    res.is_linear = true;
    return res;
}

struct EquivalenceResult {
    bool equivalent = false;
    Word translation;
    std::optional<std::array<int, 7>> permutation;  // new[i] = old[perm[i]]
    bool pure_coset = false;                        // identity permutation sufficed
};

namespace detail {

// 7-bit mask per word: bit j set iff symbol j is -1.
inline std::uint32_t word_mask(const std::vector<int>& symbols) {
    std::uint32_t m = 0;
    for (std::size_t j = 0; j < symbols.size(); ++j)
        if (symbols[j] < 0) m |= 1u << j;
    return m;
}

}  // namespace detail

// Translate by the first codeword, then search all 7! coordinate
// permutations in lexicographic order for set equality with the reference
// Hamming(7,4) codebook. The first matching permutation is returned; the
// identity is tried first, so pure cosets are reported as such.
inline EquivalenceResult hamming_equivalence(const Codebook& cb) {
    if (cb.k != 4 || cb.n != 7) throw std::invalid_argument("hamming_equivalence: requires k=4, n=7");
    if (cb.words.size() != 16) throw std::invalid_argument("hamming_equivalence: requires 16 codewords");
    EquivalenceResult res;
    res.translation = cb.words[0];

    std::vector<std::uint32_t> translated;
    translated.reserve(16);
    for (const Word& w : cb.words) translated.push_back(detail::word_mask((w * res.translation).symbols));
    std::sort(translated.begin(), translated.end());
    if (std::adjacent_find(translated.begin(), translated.end()) != translated.end()) return res;

    std::vector<std::uint32_t> reference;
    reference.reserve(16);
    for (const Word& w : hamming74_codebook().words) reference.push_back(detail::word_mask(w.symbols));
    std::sort(reference.begin(), reference.end());

    std::array<int, 7> perm{};
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::uint32_t> image(16);
    do {
        for (std::size_t m = 0; m < 16; ++m) {
            std::uint32_t v = 0;
            for (int i = 0; i < 7; ++i)
                if (translated[m] >> perm[std::size_t(i)] & 1u) v |= 1u << i;
            image[m] = v;
        }
        std::sort(image.begin(), image.end());
        if (image == reference) {
            res.equivalent = true;
            res.permutation = perm;
            res.pure_coset = perm == std::array<int, 7>{0, 1, 2, 3, 4, 5, 6};
            return res;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return res;
}

struct Disagreement {
    Word received;
    int neural = 0;
    std::vector<int> ml_set;  // all ML minimizers, ascending
};

struct AgreementReport {
    double agreement = 0.0;
    std::size_t words_checked = 0;
    std::vector<Disagreement> disagreements;
};

// Enumerate all 2^n received words and compare the given decision function
// against ML decoding on the codebook. An ML tie counts as agreement when the
// neural decision is any minimizer.
inline AgreementReport decoder_agreement(const Codebook& cb, const std::function<int(const Word&)>& neural) {
    if (cb.n > 20) throw std::invalid_argument("decoder_agreement: n > 20 is not exhaustively enumerable");
    AgreementReport rep;
    const std::uint64_t total = std::uint64_t{1} << cb.n;
    std::size_t agree = 0;
    Word y;
    y.symbols.assign(std::size_t(cb.n), 1);
    for (std::uint64_t w = 0; w < total; ++w) {
        for (int j = 0; j < cb.n; ++j) y.symbols[std::size_t(j)] = (w >> j & 1) ? -1 : 1;
        const int decision = neural(y);
        const std::vector<int> mins = ml_decode_set(y, cb);
        if (std::binary_search(mins.begin(), mins.end(), decision))
            ++agree;
        else
            rep.disagreements.push_back({y, decision, mins});
    }
    rep.words_checked = std::size_t(total);
    rep.agreement = double(agree) / double(total);
    return rep;
}

struct StructureReport {
    int k = 0, n = 0;
    std::size_t distinct_words = 0;
    int d_min = 0;
    DistanceSpectrum spectrum;
    bool is_linear_after_translation = false;
    Word translation_word;
    bool hamming_equivalent = false;
    std::optional<std::array<int, 7>> permutation;
    bool pure_coset = false;
};

inline StructureReport build_structure_report(const Codebook& cb) {
    StructureReport r;
    r.k = cb.k;
    r.n = cb.n;
    std::vector<std::vector<int>> s;
    s.reserve(cb.words.size());
    for (const Word& w : cb.words) s.push_back(w.symbols);
    std::sort(s.begin(), s.end());
    r.distinct_words = std::size_t(std::distance(s.begin(), std::unique(s.begin(), s.end())));
    r.d_min = min_distance(cb);
    r.spectrum = distance_spectrum(cb);
    const LinearityResult lin = check_linearity(cb);
    r.is_linear_after_translation = lin.is_linear;
    r.translation_word = lin.translation;
    if (cb.k == 4 && cb.n == 7 && cb.words.size() == 16) {
        const EquivalenceResult eq = hamming_equivalence(cb);
        r.hamming_equivalent = eq.equivalent;
        r.permutation = eq.permutation;
        r.pure_coset = eq.pure_coset;
    }
    return r;
}

inline std::string word_to_string(const Word& w) {
    std::ostringstream os;
    for (std::size_t i = 0; i < w.size(); ++i) os << (i ? " " : "") << (w[i] > 0 ? "+1" : "-1");
    return os.str();
}

inline std::string report_to_text(const StructureReport& r) {
    std::ostringstream os;
    os << "k: " << r.k << "\n";
    os << "n: " << r.n << "\n";
    os << "distinct_words: " << r.distinct_words << "\n";
    os << "d_min: " << r.d_min << "\n";
    os << "spectrum:";
    for (double c : r.spectrum.counts) os << " " << c;
    os << "\n";
    os << "linear_after_translation: " << (r.is_linear_after_translation ? "true" : "false") << "\n";
    os << "translation_word: " << word_to_string(r.translation_word) << "\n";
    os << "hamming_equivalent: " << (r.hamming_equivalent ? "true" : "false") << "\n";
    if (r.permutation) {
        os << "permutation:";
        for (int i : *r.permutation) os << " " << i;
        os << "\n";
        os << "match_type: " << (r.pure_coset ? "pure coset" : "coset plus coordinate permutation") << "\n";
    }
    if (r.d_min == 2)
        os << "note: d_min = 2 marks the known degenerate optimum; the code cannot correct every single flip\n";
    return os.str();
}

// Spectrum CSV: one header row d0..dn and one value row.
inline void save_spectrum_csv(const DistanceSpectrum& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("save_spectrum_csv: cannot open " + path);
    for (std::size_t d = 0; d < s.counts.size(); ++d) f << (d ? "," : "") << "d" << d;
    f << "\n";
    f.precision(17);
    for (std::size_t d = 0; d < s.counts.size(); ++d) f << (d ? "," : "") << s.counts[d];
    f << "\n";
    if (!f) throw ArtifactError("save_spectrum_csv: write failed on " + path);
}

}  // namespace binae
