#pragma once

#include "tlhs/datagen.hpp"
#include "tlhs/io.hpp"

namespace tlhs {

// JSON request documents shared by the C API and the command line. Unknown
// keys are rejected so that typos surface as InvalidArgument.

struct Generated {
  LabeledDataset data;
  UnitVector planted;
};

/// {"n", "marginal": {"kind", "d", ...}, "noise": {"kind", ...}, "planted": "random" | [..]}
Generated generate_from_json(const Json& spec, RngSeed seed);

/// {"kind": "gaussian"} or {"kind": "slc_tilt", "lambda": x}.
TargetMarginal target_from_json(const Json& spec, std::size_t d);

TesterConfig tester_config_from_json(const Json& spec);

/// {"tester": "t1".."t4", "k", "w", "sigma", "tau", "theta", "target", tester config keys}.
TesterReport run_tester_from_json(const LabeledDataset& s, const Json& request);

/// {"mode": "massart" | "agnostic", "submode", "seed", ...}.
LearnResult learn_from_json(const LabeledDataset& train, const LabeledDataset& holdout,
                            const Json& config);

/// Error of w on s; optional {"planted": [..]} and {"oracle_2d": true}.
Json evaluate_from_json(const LabeledDataset& s, const UnitVector& w, const Json& options);

UnitVector unit_vector_from_json(const Json& j, std::size_t d);

}  // namespace tlhs
