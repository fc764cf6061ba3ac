#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace pathvar::cli {

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

Coefficient parse_coefficient(const Json& node, const std::string& path) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    const std::string kind = text_or(node, "kind", path, "");
    if (kind == "constant") return Coefficient::constant_value(number(node, "value", path));
    if (kind == "linear") {
        const double a = number(node, "slope", path);
        const double b = number_or(node, "offset", path, 0.0);
        return Coefficient{[a, b](double x) { return a * x + b; },
                           a == 0.0 ? std::optional<double>(b) : std::nullopt};
    }
    if (kind == "tanh") {
        const double amp = number(node, "amplitude", path);
        const double scale = number_or(node, "scale", path, 1.0);
        const double off = number_or(node, "offset", path, 0.0);
        return Coefficient{[amp, scale, off](double x) { return off + amp * std::tanh(scale * x); },
                           std::nullopt};
    }
    throw ConfigError(join(path, "kind"), "unknown coefficient kind '" + kind +
                                              "' (expected constant, linear or tanh)");
}

FeedbackPoint parse_point(const Json& node, const std::string& path) {
    const std::string p = text_or(node, "evaluate_on", path, "controlled");
    if (p == "controlled") return FeedbackPoint::controlled;
    if (p == "base") return FeedbackPoint::base;
    throw ConfigError(join(path, "evaluate_on"), "expected 'controlled' or 'base'");
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "girsanov-validate", "law-transport", "duality",       "entropy-criterion",
        "compose-check",     "prekopa",       "particles-sim", "bridge-vs-loop"};
    return names;
}

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(path, key), "required field is missing");
    return *it;
}

const Json* optional_field(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = field(obj, key, path);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(path, key), "expected a finite number");
    return x;
}

double number_or(const Json& obj, const std::string& key, const std::string& path,
                 double fallback) {
    return optional_field(obj, key, path) ? number(obj, key, path) : fallback;
}

std::size_t count_or(const Json& obj, const std::string& key, const std::string& path,
                     std::size_t fallback) {
    const Json* v = optional_field(obj, key, path);
    if (!v) return fallback;
    if (!v->is_number_integer() || v->get<std::int64_t>() <= 0)
        throw ConfigError(join(path, key), "expected a positive integer");
    return v->get<std::size_t>();
}

std::string text_or(const Json& obj, const std::string& key, const std::string& path,
                    const std::string& fallback) {
    const Json* v = optional_field(obj, key, path);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
    return v->get<std::string>();
}

std::vector<double> numbers(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = field(obj, key, path);
    if (!v.is_array()) throw ConfigError(join(path, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

ExperimentConfig parse_config(Json document, const Overrides& overrides) {
    if (!document.is_object()) throw ConfigError("<root>", "expected a JSON object");
    if (overrides.seed) document["seed"] = *overrides.seed;
    if (overrides.output_dir) document["output_dir"] = overrides.output_dir->string();

    ExperimentConfig cfg;
    const Json& exp = field(document, "experiment", "");
    if (!exp.is_string()) throw ConfigError("experiment", "expected a string");
    cfg.experiment = exp.get<std::string>();
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
        throw ConfigError("experiment", "unknown experiment '" + cfg.experiment + "'");

    const Json& seed = field(document, "seed", "");
    if (!seed.is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = seed.get<std::uint64_t>();
    cfg.grid_N = count_or(document, "grid_N", "", 256);
    cfg.samples_M = count_or(document, "samples_M", "", 10000);
    cfg.output_dir = text_or(document, "output_dir", "", "out/" + cfg.experiment);
    cfg.document = std::move(document);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file, const Overrides& overrides) {
    std::ifstream is(file);
    if (!is) throw ConfigError(file.string(), "cannot open config file");
    Json doc;
    try {
        doc = Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw ConfigError(file.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_config(std::move(doc), overrides);
}

MeasureSpec parse_measure(const Json& node, const std::string& path) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    const std::string family = text_or(node, "family", path, "");
    MeasureSpec spec = WienerSpec{};
    if (family == "wiener") {
        spec = WienerSpec{count_or(node, "dim", path, 1)};
    } else if (family == "bridge") {
        spec = BridgeSpec{numbers(node, "endpoint", path)};
    } else if (family == "loop") {
        const Json& atoms = field(node, "atoms", path);
        if (!atoms.is_array()) throw ConfigError(join(path, "atoms"), "expected an array");
        LoopSpec loop;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            const std::string p = join(path, "atoms") + "[" + std::to_string(i) + "]";
            loop.atoms.push_back({numbers(atoms[i], "endpoint", p), number(atoms[i], "weight", p)});
        }
        spec = loop;
    } else if (family == "particles") {
        ParticlesSpec p;
        p.sigma = number(node, "sigma", path);
        p.linear_drift = number_or(node, "b", path, 0.0);
        p.constant_drift = number_or(node, "c", path, 0.0);
        p.repulsion = number(node, "gamma", path);
        p.start = numbers(node, "start", path);
        if (const Json* s = optional_field(node, "scheme", path)) {
            const std::string sp = join(path, "scheme");
            p.scheme.gap_floor = number_or(*s, "gap_floor", sp, p.scheme.gap_floor);
            p.scheme.max_halvings =
                static_cast<int>(count_or(*s, "max_halvings", sp, 40));
            p.scheme.drift_cap = number_or(*s, "drift_cap", sp, p.scheme.drift_cap);
        }
        spec = p;
    } else if (family == "diffusion") {
        spec = DiffusionSpec{parse_coefficient(field(node, "sigma", path), join(path, "sigma")),
                             parse_coefficient(field(node, "drift", path), join(path, "drift")),
                             number_or(node, "start", path, 0.0)};
    } else {
        throw ConfigError(join(path, "family"),
                          "unknown family '" + family +
                              "' (expected wiener, bridge, loop, particles or diffusion)");
    }
    try {
        validate(spec);
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    return spec;
}

Functional parse_functional(const Json& node, const std::string& path) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    const std::string name = text_or(node, "name", path, "");
    if (name == "linear-endpoint") return linear_endpoint(number_or(node, "c", path, 1.0));
    if (name == "quadratic-endpoint") return quadratic_endpoint(number_or(node, "lambda", path, 0.5));
    if (name == "clamped-midpoint")
        return clamped_midpoint(number_or(node, "lo", path, -2.0), number_or(node, "hi", path, 2.0));
    if (name == "running-max-clamp")
        return running_max_clamp(number_or(node, "lo", path, -2.0),
                                 number_or(node, "hi", path, 2.0));
    if (name == "clamped-endpoint")
        return clamped_endpoint(number_or(node, "lo", path, -2.0), number_or(node, "hi", path, 2.0));
    if (name == "clamped-midpoint-square")
        return clamped_midpoint_square(number_or(node, "cap", path, 4.0));
    if (name == "exp-linear-endpoint") return exp_linear_endpoint(number_or(node, "c", path, 1.0));
    if (name == "constant") return constant_functional(number_or(node, "value", path, 0.0));
    throw ConfigError(join(path, "name"), "unknown functional '" + name + "'");
}

std::function<double(double)> endpoint_function(const Json& node, const std::string& path) {
    const std::string name = text_or(node, "name", path, "");
    if (name == "linear-endpoint") {
        const double c = number_or(node, "c", path, 1.0);
        return [c](double x) { return c * x; };
    }
    if (name == "quadratic-endpoint") {
        const double l = number_or(node, "lambda", path, 0.5);
        return [l](double x) { return l * x * x; };
    }
    if (name == "constant") {
        const double v = number_or(node, "value", path, 0.0);
        return [v](double) { return v; };
    }
    throw ConfigError(join(path, "name"), "functional '" + name + "' is not an endpoint function");
}

DriftSpec parse_drift(const Json& node, const std::string& path, std::size_t noise_dim,
                      const Json* functional) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    const std::string kind = text_or(node, "kind", path, "");
    try {
        if (kind == "zero") return DriftSpec::zero(noise_dim);
        if (kind == "constant") return DriftSpec::constant(noise_dim, number(node, "value", path));
        if (kind == "affine-feedback")
            return affine_feedback(noise_dim, number(node, "slope", path),
                                   number_or(node, "offset", path, 0.0), parse_point(node, path));
        if (kind == "foellmer-quadratic") {
            if (noise_dim != 1) throw ConfigError(path, "foellmer drifts are scalar");
            return foellmer_quadratic(number(node, "lambda", path));
        }
        if (kind == "foellmer") {
            if (noise_dim != 1) throw ConfigError(path, "foellmer drifts are scalar");
            if (!functional) throw ConfigError(path, "foellmer drift needs a functional");
            return foellmer_drift(endpoint_function(*functional, "functional"));
        }
        if (kind == "clipped")
            return clip_drift(parse_drift(field(node, "inner", path), join(path, "inner"), noise_dim,
                                          functional),
                              number(node, "bound", path));
        if (kind == "retarded")
            return retard_drift(parse_drift(field(node, "inner", path), join(path, "inner"),
                                            noise_dim, functional),
                                number(node, "lag", path));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(join(path, "kind"),
                      "unknown drift kind '" + kind +
                          "' (expected zero, constant, affine-feedback, foellmer, "
                          "foellmer-quadratic, clipped or retarded)");
}

DriftFamily parse_family(const Json& node, const std::string& path, std::size_t noise_dim) {
    const std::string name = text_or(node, "family", path, "constant");
    if (name == "constant") return constant_family(noise_dim);
    if (name == "affine-feedback") return affine_feedback_family(noise_dim);
    throw ConfigError(join(path, "family"), "unknown drift family '" + name + "'");
}

OptimizerConfig parse_optimizer(const Json& node, const std::string& path) {
    OptimizerConfig c;
    c.epochs = count_or(node, "epochs", path, c.epochs);
    c.pool_size = count_or(node, "pool_size", path, c.pool_size);
    c.batch_size = count_or(node, "batch_size", path, c.batch_size);
    c.learning_rate = number_or(node, "learning_rate", path, c.learning_rate);
    c.fd_step = number_or(node, "fd_step", path, c.fd_step);
    c.clip_bound = number_or(node, "clip_bound", path, c.clip_bound);
    c.final_samples = count_or(node, "final_samples", path, c.final_samples);
    return c;
}

}  // namespace pathvar::cli
