// trains a (7,4) code with a scaled-down budget and prints what the learned
// codebook looks like structurally. the library defaults reproduce the full
// experiment; this keeps the demo in the seconds range.
#include <iostream>

#include "binae/autoencoder.hpp"
#include "binae/analysis.hpp"

using namespace binae;

int main() {
    TrainConfig cfg;
    cfg.epochs_continuous = 40;
    cfg.epochs_total = 60;
    cfg.train_samples = 20000;
    cfg.restarts = 3;
    cfg.val_trials = 20000;
    cfg.history_val_trials = 2000;
    cfg.seed = 1;

    std::cout << "training " << cfg.restarts << " restarts of a (" << cfg.n << "," << cfg.k << ") code...\n";
    const RestartResult res = train_with_restarts(cfg);

    std::cout << "restart,seed,d_min,distinct_words,val_bler,selected\n";
    std::cout.precision(6);
    for (const RestartRecord& r : res.report)
        std::cout << r.restart << "," << r.seed << "," << r.d_min << "," << r.distinct_words << ","
                  << r.val_bler << "," << (r.selected ? 1 : 0) << "\n";

    std::cout << "\n" << report_to_text(build_structure_report(res.model.codebook));

    std::cout << "\ncodebook:\n";
    for (std::size_t m = 0; m < res.model.codebook.words.size(); ++m)
        std::cout << m << ": " << word_to_string(res.model.codebook.words[m]) << "\n";
    return 0;
}
