// JSON form of the structure report, split into its own header so only the
// CLI and the tests that need it pay for the json library include.
#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "binae/analysis.hpp"

namespace binae {

inline nlohmann::json report_to_json(const StructureReport& r) {
    nlohmann::json j;
    j["k"] = r.k;
    j["n"] = r.n;
    j["distinct_words"] = r.distinct_words;
    j["d_min"] = r.d_min;
    j["spectrum"] = r.spectrum.counts;
    j["linear_after_translation"] = r.is_linear_after_translation;
    j["translation_word"] = r.translation_word.symbols;
    j["hamming_equivalent"] = r.hamming_equivalent;
    if (r.permutation) {
        j["permutation"] = *r.permutation;
        j["match_type"] = r.pure_coset ? "pure_coset" : "coset_plus_permutation";
    } else {
        j["permutation"] = nullptr;
    }
    return j;
}

inline void save_report_json(const StructureReport& r, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArtifactError("save_report_json: cannot open " + path);
    f << report_to_json(r).dump(2) << "\n";
    if (!f) throw ArtifactError("save_report_json: write failed on " + path);
}

}  // namespace binae
