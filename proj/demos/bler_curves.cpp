// monte carlo curve for the reference code under maximum-likelihood decoding,
// checked against the closed-form block error rate of a single-error
// correcting perfect code.
#include <cmath>
#include <iostream>

#include "binae/classic.hpp"
#include "binae/eval.hpp"

using namespace binae;

int main() {
    const Codebook cb = hamming74_codebook();
    EvalConfig cfg;
    cfg.trials_per_p = 20000;
    cfg.seed = 1;
    const BlerCurve curve = run_bler(cfg, cb, make_ml_decoder(cb));

    std::cout << "p,monte_carlo,exact,z\n";
    std::cout.precision(6);
    for (const BlerPoint& pt : curve.points) {
        const double exact = exact_bler_perfect74(pt.p);
        const double se = std::sqrt(exact * (1.0 - exact) / double(pt.trials));
        std::cout << pt.p << "," << pt.bler << "," << exact << "," << (pt.bler - exact) / se << "\n";
    }
    return 0;
}
