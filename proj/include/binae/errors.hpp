#pragma once

#include <stdexcept>
#include <string>

namespace binae {

// Invalid hyperparameters or flag combinations.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed artifact files (checkpoints, codebooks, curves).
struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss during optimization; carries the offending epoch.
struct TrainingDiverged : std::runtime_error {
    int epoch;
    explicit TrainingDiverged(int at_epoch)
        : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(at_epoch)),
          epoch(at_epoch) {}
};

}  // namespace binae
