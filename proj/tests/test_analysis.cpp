#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "binae/analysis.hpp"
#include "binae/classic.hpp"
#include "binae/numerics.hpp"
#include "binae/report_json.hpp"

using namespace binae;

namespace {

const std::vector<double> kHammingSpectrum = {1, 0, 0, 7, 7, 0, 0, 1};

Codebook random_codebook(int k, int n, Rng& rng) {
    Codebook cb;
    cb.k = k;
    cb.n = n;
    for (int m = 0; m < (1 << k); ++m) {
        std::vector<int> s(std::size_t(n), 0);
        for (int& v : s) v = rng.next_below(2) ? 1 : -1;
        cb.words.emplace_back(std::move(s));
    }
    return cb;
}

Word random_pm_word(int n, Rng& rng) {
    std::vector<int> s(std::size_t(n), 0);
    for (int& v : s) v = rng.next_below(2) ? 1 : -1;
    return Word(std::move(s));
}

Codebook translate(const Codebook& cb, const Word& t) {
    Codebook out = cb;
    for (Word& w : out.words) w = w * t;
    return out;
}

Codebook permute_columns(const Codebook& cb, const std::array<int, 7>& perm) {
    Codebook out = cb;
    for (std::size_t m = 0; m < cb.words.size(); ++m) {
        std::vector<int> s(7);
        for (int i = 0; i < 7; ++i) s[std::size_t(i)] = cb.words[m][std::size_t(perm[std::size_t(i)])];
        out.words[m] = Word(std::move(s));
    }
    return out;
}

bool same_word_set(const Codebook& a, const Codebook& b) {
    std::vector<std::vector<int>> sa, sb;
    for (const Word& w : a.words) sa.push_back(w.symbols);
    for (const Word& w : b.words) sb.push_back(w.symbols);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa == sb;
}

// 16 distinct words with a distance-2 pair: Hamming with one symbol of the
// weight-3 word flipped toward the all-ones word
Codebook degenerate_codebook() {
    Codebook cb = hamming74_codebook();
    std::vector<int> s = cb.words[1].symbols;
    REQUIRE(s[0] == -1);
    s[0] = 1;
    cb.words[1] = Word(std::move(s));
    return cb;
}

}  // namespace

TEST_CASE("the reference code has the published distance spectrum") {
    const DistanceSpectrum s = distance_spectrum(hamming74_codebook());
    REQUIRE(s.counts == kHammingSpectrum);
}

TEST_CASE("an antipodal pair concentrates the spectrum at 0 and n") {
    Codebook cb;
    cb.k = 1;
    cb.n = 7;
    cb.words = {Word({1, 1, 1, 1, 1, 1, 1}), Word({-1, -1, -1, -1, -1, -1, -1})};
    const DistanceSpectrum s = distance_spectrum(cb);
    REQUIRE(s.counts == std::vector<double>{1, 0, 0, 0, 0, 0, 0, 1});
}

TEST_CASE("the spectrum matches an independent pair histogram and sums to M") {
    Rng rng(91);
    for (int rep = 0; rep < 20; ++rep) {
        const Codebook cb = random_codebook(3, 5, rng);
        const DistanceSpectrum s = distance_spectrum(cb);
        std::vector<double> hist(6, 0.0);
        for (const Word& a : cb.words)
            for (const Word& b : cb.words) {
                int d = 0;
                for (std::size_t i = 0; i < 5; ++i)
                    if (a[i] != b[i]) ++d;
                hist[std::size_t(d)] += 1.0;
            }
        for (double& h : hist) h /= 8.0;
        REQUIRE(s.counts == hist);
        double total = 0.0;
        for (double c : s.counts) total += c;
        REQUIRE(total == Catch::Approx(8.0).margin(1e-12));
    }
}

TEST_CASE("the spectrum is invariant under translation") {
    Rng rng(92);
    const Codebook cb = hamming74_codebook();
    for (int rep = 0; rep < 10; ++rep) {
        const Codebook shifted = translate(cb, random_pm_word(7, rng));
        REQUIRE(distance_spectrum(shifted) == distance_spectrum(cb));
    }
}

TEST_CASE("minimum distance reads off the spectrum's first nonzero") {
    REQUIRE(min_distance(hamming74_codebook()) == 3);
    Codebook dup;
    dup.k = 1;
    dup.n = 3;
    dup.words = {Word({1, 1, 1}), Word({1, 1, 1})};
    REQUIRE(min_distance(dup) == 0);
    Codebook single;
    single.k = 0;
    single.n = 3;
    single.words = {Word({1, 1, 1})};
    REQUIRE_THROWS_AS(min_distance(single), std::invalid_argument);
    REQUIRE(min_distance(degenerate_codebook()) == 2);
}

TEST_CASE("the reference code is linear and every coset of it passes too") {
    const Codebook cb = hamming74_codebook();
    const LinearityResult base = check_linearity(cb);
    REQUIRE(base.is_linear);
    REQUIRE(base.translation == cb.words[0]);
    Rng rng(93);
    for (int rep = 0; rep < 10; ++rep) {
        const LinearityResult r = check_linearity(translate(cb, random_pm_word(7, rng)));
        REQUIRE(r.is_linear);
    }
}

TEST_CASE("a set without product closure fails the linearity check") {
    Codebook cb;
    cb.k = 2;
    cb.n = 3;
    cb.words = {Word({1, 1, 1}), Word({1, 1, -1}), Word({1, -1, 1}), Word({-1, 1, 1})};
    REQUIRE_FALSE(check_linearity(cb).is_linear);
}

TEST_CASE("duplicate words fail the linearity check") {
    Codebook cb;
    cb.k = 1;
    cb.n = 3;
    cb.words = {Word({1, 1, 1}), Word({1, 1, 1})};
    REQUIRE_FALSE(check_linearity(cb).is_linear);
}

TEST_CASE("the pinned codebook is equivalent to itself as a pure coset") {
    const EquivalenceResult r = hamming_equivalence(hamming74_codebook());
    REQUIRE(r.equivalent);
    REQUIRE(r.permutation.has_value());
    REQUIRE(*r.permutation == std::array<int, 7>{0, 1, 2, 3, 4, 5, 6});
    REQUIRE(r.pure_coset);
}

TEST_CASE("a translated code is recognized as a pure coset") {
    Rng rng(94);
    const Codebook cb = translate(hamming74_codebook(), random_pm_word(7, rng));
    const EquivalenceResult r = hamming_equivalence(cb);
    REQUIRE(r.equivalent);
    REQUIRE(r.pure_coset);
}

TEST_CASE("a shuffled coset is matched and the returned permutation verifies") {
    const Codebook reference = hamming74_codebook();
    Rng rng(95);
    for (int rep = 0; rep < 5; ++rep) {
        std::array<int, 7> shuffle = {0, 1, 2, 3, 4, 5, 6};
        for (std::size_t i = 6; i > 0; --i) std::swap(shuffle[i], shuffle[rng.next_below(i + 1)]);
        const Codebook cb = permute_columns(translate(reference, random_pm_word(7, rng)), shuffle);
        const EquivalenceResult r = hamming_equivalence(cb);
        REQUIRE(r.equivalent);
        REQUIRE(r.permutation.has_value());
        // oracle: translating then permuting with the returned data must land
        // exactly on the reference word set
        const Codebook mapped = permute_columns(translate(cb, r.translation), *r.permutation);
        REQUIRE(same_word_set(mapped, reference));
        REQUIRE(distance_spectrum(cb).counts == kHammingSpectrum);
    }
}

TEST_CASE("a distance-2 code is not equivalent to the reference") {
    const EquivalenceResult r = hamming_equivalence(degenerate_codebook());
    REQUIRE_FALSE(r.equivalent);
    REQUIRE_FALSE(r.permutation.has_value());
}

TEST_CASE("equivalence checking rejects mismatched dimensions") {
    Codebook cb;
    cb.k = 2;
    cb.n = 3;
    cb.words = {Word({1, 1, 1}), Word({1, 1, -1}), Word({1, -1, 1}), Word({-1, 1, 1})};
    REQUIRE_THROWS_AS(hamming_equivalence(cb), std::invalid_argument);
}

TEST_CASE("maximum-likelihood decoding agrees with itself everywhere") {
    const Codebook cb = hamming74_codebook();
    const AgreementReport rep = decoder_agreement(cb, [&](const Word& y) { return ml_decode(y, cb); });
    REQUIRE(rep.agreement == 1.0);
    REQUIRE(rep.words_checked == 128);
    REQUIRE(rep.disagreements.empty());
}

TEST_CASE("a constant decoder agrees exactly on one decoding sphere") {
    const Codebook cb = hamming74_codebook();
    const AgreementReport rep = decoder_agreement(cb, [](const Word&) { return 0; });
    // perfect code: word 0 plus its 7 single-flip neighbours, out of 128
    REQUIRE(rep.agreement == 8.0 / 128.0);
    REQUIRE(rep.disagreements.size() == 120);
    for (const Disagreement& d : rep.disagreements) {
        REQUIRE(d.neural == 0);
        REQUIRE(!d.ml_set.empty());
        REQUIRE(std::find(d.ml_set.begin(), d.ml_set.end(), 0) == d.ml_set.end());
    }
}

TEST_CASE("an ML tie counts as agreement for any minimizer") {
    Codebook cb;
    cb.k = 1;
    cb.n = 2;
    cb.words = {Word({1, 1}), Word({-1, -1})};
    const AgreementReport rep = decoder_agreement(cb, [](const Word&) { return 0; });
    // (+,+) and both mixed words accept 0; only (-,-) rejects it
    REQUIRE(rep.words_checked == 4);
    REQUIRE(rep.agreement == 3.0 / 4.0);
    REQUIRE(rep.disagreements.size() == 1);
    REQUIRE(rep.disagreements[0].ml_set == std::vector<int>{1});
}

TEST_CASE("the structure report collects every analysis in one pass") {
    const StructureReport r = build_structure_report(hamming74_codebook());
    REQUIRE(r.k == 4);
    REQUIRE(r.n == 7);
    REQUIRE(r.distinct_words == 16);
    REQUIRE(r.d_min == 3);
    REQUIRE(r.spectrum.counts == kHammingSpectrum);
    REQUIRE(r.is_linear_after_translation);
    REQUIRE(r.hamming_equivalent);
    REQUIRE(r.pure_coset);
}

TEST_CASE("report text carries the verdicts and flags the degenerate optimum") {
    const std::string good = report_to_text(build_structure_report(hamming74_codebook()));
    REQUIRE(good.find("d_min: 3") != std::string::npos);
    REQUIRE(good.find("hamming_equivalent: true") != std::string::npos);
    REQUIRE(good.find("linear_after_translation: true") != std::string::npos);
    REQUIRE(good.find("degenerate") == std::string::npos);

    const std::string bad = report_to_text(build_structure_report(degenerate_codebook()));
    REQUIRE(bad.find("d_min: 2") != std::string::npos);
    REQUIRE(bad.find("degenerate") != std::string::npos);
    REQUIRE(bad.find("hamming_equivalent: false") != std::string::npos);
}

TEST_CASE("report json mirrors the report fields") {
    const StructureReport r = build_structure_report(hamming74_codebook());
    const nlohmann::json j = report_to_json(r);
    REQUIRE(j["k"] == 4);
    REQUIRE(j["n"] == 7);
    REQUIRE(j["d_min"] == 3);
    REQUIRE(j["spectrum"] == nlohmann::json(kHammingSpectrum));
    REQUIRE(j["linear_after_translation"] == true);
    REQUIRE(j["hamming_equivalent"] == true);
    REQUIRE(j["match_type"] == "pure_coset");

    const std::string path = (std::filesystem::temp_directory_path() / "binae_report.json").string();
    save_report_json(r, path);
    std::ifstream f(path);
    nlohmann::json back = nlohmann::json::parse(f);
    REQUIRE(back == j);
    std::remove(path.c_str());
}

TEST_CASE("spectrum csv writes a d0..dn header and exact values") {
    const DistanceSpectrum s = distance_spectrum(hamming74_codebook());
    const std::string path = (std::filesystem::temp_directory_path() / "binae_spectrum.csv").string();
    save_spectrum_csv(s, path);
    std::ifstream f(path);
    std::string header, values;
    REQUIRE(std::getline(f, header));
    REQUIRE(std::getline(f, values));
    REQUIRE(header == "d0,d1,d2,d3,d4,d5,d6,d7");
    std::stringstream ss(values);
    std::string cell;
    std::vector<double> parsed;
    while (std::getline(ss, cell, ',')) parsed.push_back(std::stod(cell));
    REQUIRE(parsed == kHammingSpectrum);
    std::remove(path.c_str());
}

TEST_CASE("word rendering uses signed symbols") {
    REQUIRE(word_to_string(Word({1, -1, 1})) == "+1 -1 +1");
}
