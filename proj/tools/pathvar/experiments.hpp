#pragma once

#include "config.hpp"
#include "output.hpp"

#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pathvar::cli {

struct Assertion {
    std::string name;
    bool passed;
    double value;
    std::string relation;  // "<", "<=", ">", ">=", "=="
    double threshold;
};

struct ExperimentOutput {
    Json results = Json::object();
    std::vector<Assertion> assertions;
    std::vector<std::pair<std::string, CsvTable>> tables;  // file name, content
};

[[nodiscard]] ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Runs the experiment and writes summary.json plus its CSV files into
/// cfg.output_dir. Returns 0 when every assertion passes and 2 otherwise.
int execute(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace pathvar::cli
