#pragma once

#include "output.hpp"

#include "pathvar/drift.hpp"
#include "pathvar/errors.hpp"
#include "pathvar/functional.hpp"
#include "pathvar/measures.hpp"
#include "pathvar/variational.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pathvar::cli {

/// Invalid or missing configuration field; the message starts with the field path.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& path, const std::string& what)
        : InvalidArgument(path + ": " + what) {}
};

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t grid_N = 0;
    std::size_t samples_M = 0;
    std::filesystem::path output_dir;
    Json document;  // the parsed config with command-line overrides applied
};

struct Overrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
};

[[nodiscard]] const std::vector<std::string>& experiment_names();

[[nodiscard]] ExperimentConfig parse_config(Json document, const Overrides& overrides = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& file,
                                           const Overrides& overrides = {});

// Field accessors; `path` is the dotted location of `obj` used in messages.
[[nodiscard]] const Json& field(const Json& obj, const std::string& key, const std::string& path);
[[nodiscard]] const Json* optional_field(const Json& obj, const std::string& key,
                                         const std::string& path);
[[nodiscard]] double number(const Json& obj, const std::string& key, const std::string& path);
[[nodiscard]] double number_or(const Json& obj, const std::string& key, const std::string& path,
                               double fallback);
[[nodiscard]] std::size_t count_or(const Json& obj, const std::string& key,
                                   const std::string& path, std::size_t fallback);
[[nodiscard]] std::string text_or(const Json& obj, const std::string& key,
                                  const std::string& path, const std::string& fallback);
[[nodiscard]] std::vector<double> numbers(const Json& obj, const std::string& key,
                                          const std::string& path);

[[nodiscard]] MeasureSpec parse_measure(const Json& node, const std::string& path);
[[nodiscard]] Functional parse_functional(const Json& node, const std::string& path);
/// Endpoint function g with f(W) = g(W(1)_0), for functionals that admit one.
[[nodiscard]] std::function<double(double)> endpoint_function(const Json& node,
                                                              const std::string& path);
/// `functional` is used by drifts derived from the objective (foellmer).
[[nodiscard]] DriftSpec parse_drift(const Json& node, const std::string& path,
                                    std::size_t noise_dim, const Json* functional);
[[nodiscard]] DriftFamily parse_family(const Json& node, const std::string& path,
                                       std::size_t noise_dim);
[[nodiscard]] OptimizerConfig parse_optimizer(const Json& node, const std::string& path);

}  // namespace pathvar::cli
