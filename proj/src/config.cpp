#include "hypatk/config.hpp"

#include "hypatk/error.hpp"
#include "hypatk/io.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <type_traits>

namespace hypatk::config {

namespace {

using json = nlohmann::json;

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (auto k : allowed) ok = ok || item.key() == k;
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        const bool ok = std::is_unsigned_v<T> ? v.is_number_unsigned() : v.is_number_integer();
        if (!ok) {
            throw ConfigError(std::string(where) + "." + key +
                              (std::is_unsigned_v<T> ? ": expected a non-negative integer" : ": expected an integer"));
        }
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(where) + "." + key + ": wrong type");
    }
}

attacks::Family family_from(const json& v, std::string_view where) {
    const std::string name = v.is_string() ? v.get<std::string>() : std::string();
    const auto f = attacks::parse_family(name);
    if (!f) throw ConfigError(std::string(where) + ": unknown attack '" + name + "'");
    return *f;
}

model::ObjectiveKind objective_from(const json& v, std::string_view where) {
    const std::string name = v.is_string() ? v.get<std::string>() : std::string();
    const auto o = model::parse_objective(name);
    if (!o) throw ConfigError(std::string(where) + ": unknown objective '" + name + "'");
    return *o;
}

GroupSelector selector_from(const json& j, std::string_view where) {
    only_keys(j, where, {"attack", "objective"});
    if (!j.contains("attack")) throw ConfigError(std::string(where) + ": missing attack");
    GroupSelector g;
    g.family = family_from(j.at("attack"), where);
    if (j.contains("objective")) g.objective = objective_from(j.at("objective"), where);
    return g;
}

void read_dataset(const json& j, sampling::DatasetSpec& d) {
    only_keys(j, "dataset", {"num_classes", "radius", "variance", "train_per_class", "test_per_class", "curvature",
                             "dim", "seed"});
    read(j, "num_classes", d.num_classes, "dataset");
    read(j, "radius", d.radius, "dataset");
    read(j, "variance", d.variance, "dataset");
    read(j, "train_per_class", d.train_per_class, "dataset");
    read(j, "test_per_class", d.test_per_class, "dataset");
    read(j, "curvature", d.curvature, "dataset");
    read(j, "dim", d.dim, "dataset");
    read(j, "seed", d.seed, "dataset");
}

void read_train(const json& j, model::TrainConfig& t) {
    only_keys(j, "train", {"learning_rate", "batch_size", "epochs", "seed", "reduction"});
    read(j, "learning_rate", t.learning_rate, "train");
    read(j, "batch_size", t.batch_size, "train");
    read(j, "epochs", t.epochs, "train");
    read(j, "seed", t.seed, "train");
    if (j.contains("reduction")) {
        const json& r = j.at("reduction");
        if (r == "sum") {
            t.reduction = model::LossReduction::Sum;
        } else if (r == "mean") {
            t.reduction = model::LossReduction::Mean;
        } else {
            throw ConfigError("train.reduction: expected \"sum\" or \"mean\"");
        }
    }
}

void read_sweep(const json& j, analysis::SweepGrid& s) {
    only_keys(j, "sweep", {"attacks", "objectives", "epsilons", "pgd_steps", "pgd_step_scale", "newton"});
    if (j.contains("attacks")) {
        if (!j.at("attacks").is_array()) throw ConfigError("sweep.attacks: expected an array");
        s.families.clear();
        for (const auto& v : j.at("attacks")) s.families.push_back(family_from(v, "sweep.attacks"));
    }
    if (j.contains("objectives")) {
        if (!j.at("objectives").is_array()) throw ConfigError("sweep.objectives: expected an array");
        s.objectives.clear();
        for (const auto& v : j.at("objectives")) s.objectives.push_back(objective_from(v, "sweep.objectives"));
    }
    read(j, "epsilons", s.epsilons, "sweep");
    read(j, "pgd_steps", s.pgd_steps, "sweep");
    read(j, "pgd_step_scale", s.pgd_step_scale, "sweep");
    if (j.contains("newton")) {
        const json& n = j.at("newton");
        only_keys(n, "sweep.newton", {"max_iter", "tol"});
        read(n, "max_iter", s.newton.max_iter, "sweep.newton");
        read(n, "tol", s.newton.tol, "sweep.newton");
    }
}

void read_report(const json& j, ReportConfig& r) {
    only_keys(j, "report", {"compare_a", "compare_b", "raster_resolution"});
    if (j.contains("compare_a")) r.compare_a = selector_from(j.at("compare_a"), "report.compare_a");
    if (j.contains("compare_b")) r.compare_b = selector_from(j.at("compare_b"), "report.compare_b");
    read(j, "raster_resolution", r.raster_resolution, "report");
}

}  // namespace

std::string GroupSelector::describe() const {
    std::string s(attacks::family_name(family));
    if (objective) s += "/" + std::string(model::objective_name(*objective));
    return s;
}

RunConfig::RunConfig() {
    sweep.families = {attacks::Family::EuclideanFgm, attacks::Family::HyperbolicFgm};
    sweep.objectives.assign(std::begin(model::kAllObjectives), std::end(model::kAllObjectives));
    for (int i = 1; i <= 8; ++i) sweep.epsilons.push_back(0.25 * i);
}

void RunConfig::validate() const {
    dataset.validate();
    train.validate();
    if (report.raster_resolution < 2) throw ConfigError("report.raster_resolution must be >= 2");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(std::string_view text, std::string_view source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(source) + ": " + e.what());
    }
    only_keys(j, source, {"dataset", "train", "sweep", "report", "output_dir", "emit_svg"});
    RunConfig cfg;
    if (j.contains("dataset")) read_dataset(j.at("dataset"), cfg.dataset);
    if (j.contains("train")) read_train(j.at("train"), cfg.train);
    if (j.contains("sweep")) read_sweep(j.at("sweep"), cfg.sweep);
    if (j.contains("report")) read_report(j.at("report"), cfg.report);
    std::string out_dir = cfg.output_dir.string();
    read(j, "output_dir", out_dir, "config");
    cfg.output_dir = out_dir;
    read(j, "emit_svg", cfg.emit_svg, "config");
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_text(path);
    } catch (const DataError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(text, path.string());
}

}  // namespace hypatk::config
