#include "hypatk/pipeline.hpp"

#include "hypatk/error.hpp"
#include "hypatk/io.hpp"
#include "hypatk/svg.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hypatk::pipeline {

namespace fs = std::filesystem;
using attacks::Family;
using attacks::PredictionRecord;
using model::ObjectiveKind;

std::string files::records(Family family, ObjectiveKind objective) {
    return "records_" + std::string(attacks::family_name(family)) + "_" +
           std::string(model::objective_name(objective)) + ".csv";
}

std::string files::matrix(Family family, ObjectiveKind objective, double epsilon) {
    return std::string(attacks::family_name(family)) + "_" + std::string(model::objective_name(objective)) + "_eps" +
           io::format_double(epsilon) + ".csv";
}

namespace {

[[noreturn]] void self_check_failed(const fs::path& path, const std::string& what) {
    throw DataError("self-check failed for " + path.string() + ": " + what);
}

// Writes text and parses it back from disk with `check`.
template <class Check>
void write_checked(const fs::path& path, const std::string& text, Check&& check) {
    io::write_text(path, text);
    const std::string back = io::read_text(path);
    if (back != text) self_check_failed(path, "content differs after write");
    check(back, path.string());
}

void check_svg(const std::string& text, const fs::path& path) {
    if (text.rfind("<svg ", 0) != 0 || text.find("</svg>") == std::string::npos) self_check_failed(path, "not an SVG");
}

sampling::LabeledDataset load_split(const config::RunConfig& cfg, const char* name, sampling::Split split) {
    const fs::path path = cfg.output_dir / name;
    if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run generate first)");
    sampling::LabeledDataset data =
        io::parse_dataset_csv(io::read_text(path), path.string(), geometry::Curvature(cfg.dataset.curvature), split);
    if (data.empty()) throw DataError(path.string() + ": no samples");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] >= cfg.dataset.num_classes) {
            throw DataError(path.string() + ":" + std::to_string(i + 2) + ": label exceeds num_classes");
        }
    }
    return data;
}

model::MlrParams load_model(const config::RunConfig& cfg) {
    const fs::path path = cfg.output_dir / files::kModel;
    if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run train first)");
    model::MlrParams params = io::parse_model_json(io::read_text(path), path.string());
    if (params.num_classes() != cfg.dataset.num_classes) {
        throw DataError(path.string() + ": class count differs from the configuration");
    }
    return params;
}

std::vector<std::size_t> class_counts(const sampling::LabeledDataset& data, int C) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(C), 0);
    for (int y : data.labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

void check_matrix(const analysis::MisclassMatrix& m, const fs::path& path) {
    for (int i = 0; i < m.num_classes(); ++i) {
        const double sum = m.values.row(i).sum();
        if (m.values(i, i) != 0.0) self_check_failed(path, "nonzero diagonal");
        if ((m.values.row(i).array() < 0.0).any()) self_check_failed(path, "negative entry");
        if (m.row_counts[static_cast<std::size_t>(i)] == 0 ? sum != 0.0 : std::abs(sum - 1.0) > 1e-12) {
            self_check_failed(path, "row " + std::to_string(i) + " is not a probability vector");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_generate(const config::RunConfig& cfg, std::ostream& log) {
    const sampling::GeneratedData data = sampling::generate_dataset(cfg.dataset);
    const int C = cfg.dataset.num_classes;
    const geometry::Curvature c(cfg.dataset.curvature);

    for (const auto* split : {&data.train, &data.test}) {
        const char* name = split->split == sampling::Split::Train ? files::kTrain : files::kTest;
        const std::size_t per_class =
            split->split == sampling::Split::Train ? cfg.dataset.train_per_class : cfg.dataset.test_per_class;
        write_checked(cfg.output_dir / name, io::dataset_csv(*split), [&](const std::string& text, const std::string& src) {
            const auto back = io::parse_dataset_csv(text, src, c, split->split);
            if (back.size() != per_class * static_cast<std::size_t>(C)) self_check_failed(src, "row count");
            for (std::size_t n : class_counts(back, C)) {
                if (n != per_class) self_check_failed(src, "per-class count");
            }
        });
        log << sampling::split_name(split->split) << ":";
        const auto counts = class_counts(*split, C);
        for (int k = 0; k < C; ++k) log << " class " << k << "=" << counts[static_cast<std::size_t>(k)];
        log << "\n";
    }
    log << "boundary clamps: " << data.clamped << "\n";
}

void cmd_train(const config::RunConfig& cfg, std::ostream& log) {
    const sampling::LabeledDataset train_data = load_split(cfg, files::kTrain, sampling::Split::Train);
    const model::TrainResult result = model::train(train_data, cfg.dataset.num_classes,
                                                   geometry::Curvature(cfg.dataset.curvature), cfg.train);

    const std::string model_text = io::model_json(result.params);
    write_checked(cfg.output_dir / files::kModel, model_text, [&](const std::string& text, const std::string& src) {
        const model::MlrParams back = io::parse_model_json(text, src);
        for (int k = 0; k < back.num_classes(); ++k) {
            const auto i = static_cast<std::size_t>(k);
            if (back.p[i].coords() != result.params.p[i].coords() || back.a[i] != result.params.a[i]) {
                self_check_failed(src, "parameters do not round-trip");
            }
        }
    });
    write_checked(cfg.output_dir / files::kHistory, io::history_csv(result.history),
                  [&](const std::string& text, const std::string& src) {
                      if (io::parse_history_csv(text, src).size() != static_cast<std::size_t>(cfg.train.epochs)) {
                          self_check_failed(src, "history must have one row per epoch");
                      }
                  });
    if (!result.history.empty()) {
        const auto& last = result.history.back();
        log << "epoch " << last.epoch << ": mean_ce=" << io::format_double(last.mean_ce)
            << " train_accuracy=" << io::format_double(last.train_accuracy) << "\n";
    }
    log << "wrote " << (cfg.output_dir / files::kModel).string() << "\n";
}

void cmd_sweep(const config::RunConfig& cfg, std::ostream& log) {
    cfg.sweep.validate();
    const model::MlrParams params = load_model(cfg);
    const sampling::LabeledDataset test = load_split(cfg, files::kTest, sampling::Split::Test);

    std::map<std::pair<Family, ObjectiveKind>, std::vector<PredictionRecord>> groups;
    const analysis::SweepResult sweep =
        analysis::epsilon_sweep(params, test, cfg.sweep, [&](const attacks::AttackSpec& spec, auto&& records) {
            auto& group = groups[{spec.family, spec.objective}];
            group.insert(group.end(), records.begin(), records.end());
        });

    const std::size_t expected_records = cfg.sweep.epsilons.size() * test.size();
    for (Family f : cfg.sweep.families) {
        for (ObjectiveKind o : cfg.sweep.objectives) {
            const auto& records = groups.at({f, o});
            write_checked(cfg.output_dir / files::records(f, o), io::records_csv(records),
                          [&](const std::string& text, const std::string& src) {
                              if (io::parse_records_csv(text, src).size() != expected_records) {
                                  self_check_failed(src, "record count");
                              }
                          });
        }
    }
    const std::size_t expected_rows =
        cfg.sweep.families.size() * cfg.sweep.objectives.size() * cfg.sweep.epsilons.size();
    write_checked(cfg.output_dir / files::kSweep, io::sweep_csv(sweep), [&](const std::string& text, const std::string& src) {
        if (io::parse_sweep_csv(text, src).rows.size() != expected_rows) self_check_failed(src, "row count");
    });
    if (cfg.emit_svg) {
        write_checked(cfg.output_dir / files::kSweepSvg, svg::sweep_chart_svg(sweep),
                      [](const std::string& text, const fs::path& p) { check_svg(text, p); });
    }
    for (const auto& row : sweep.rows) {
        log << attacks::family_name(row.family) << " " << model::objective_name(row.objective)
            << " eps=" << io::format_double(row.epsilon) << " accuracy=" << io::format_double(row.accuracy) << "\n";
    }
}

void cmd_report(const config::RunConfig& cfg, std::ostream& log) {
    const model::MlrParams params = load_model(cfg);
    const sampling::LabeledDataset test = load_split(cfg, files::kTest, sampling::Split::Test);
    const int C = params.num_classes();
    const model::Evaluation clean = model::evaluate(params, test);
    log << "clean test accuracy: " << io::format_double(clean.accuracy) << "\n";

    nlohmann::json report;
    report["clean_test_accuracy"] = clean.accuracy;
    report["clean_test_mean_ce"] = clean.mean_ce;
    report["test_samples"] = test.size();

    // Misclassification matrix per (attack, objective, eps) present on disk.
    struct Cell {
        Family family;
        ObjectiveKind objective;
        double epsilon;
        analysis::MisclassMatrix matrix;
    };
    std::vector<Cell> cells;
    std::vector<std::string> available;
    for (Family f : attacks::kAllFamilies) {
        for (ObjectiveKind o : model::kAllObjectives) {
            const fs::path path = cfg.output_dir / files::records(f, o);
            if (!fs::exists(path)) continue;
            const std::vector<PredictionRecord> records = io::parse_records_csv(io::read_text(path), path.string());
            available.push_back(std::string(attacks::family_name(f)) + "/" + std::string(model::objective_name(o)));
            std::vector<double> eps_order;
            std::map<double, std::vector<PredictionRecord>> by_eps;
            for (const auto& r : records) {
                if (r.family != f || r.objective != o) throw DataError(path.string() + ": mixed attack groups");
                auto& bucket = by_eps[r.epsilon];
                if (bucket.empty()) eps_order.push_back(r.epsilon);
                bucket.push_back(r);
            }
            for (double eps : eps_order) {
                cells.push_back({f, o, eps, analysis::misclass_matrix(by_eps[eps], C)});
            }
        }
    }
    if (cells.empty()) throw DataError("no records in " + cfg.output_dir.string() + " (run sweep first)");

    nlohmann::json matrices = nlohmann::json::array();
    for (const auto& cell : cells) {
        const std::string name = files::matrix(cell.family, cell.objective, cell.epsilon);
        write_checked(cfg.output_dir / files::kMatrixDir / name, io::matrix_csv(cell.matrix),
                      [&](const std::string& text, const std::string& src) {
                          check_matrix(io::parse_matrix_csv(text, src), src);
                      });
        matrices.push_back({{"attack", attacks::family_name(cell.family)},
                            {"objective", model::objective_name(cell.objective)},
                            {"epsilon", cell.epsilon},
                            {"file", std::string(files::kMatrixDir) + "/" + name}});
    }
    report["matrices"] = std::move(matrices);

    auto select = [&](const config::GroupSelector& g) {
        std::vector<analysis::MisclassMatrix> out;
        for (const auto& cell : cells) {
            if (cell.family == g.family && (!g.objective || *g.objective == cell.objective)) out.push_back(cell.matrix);
        }
        if (out.empty()) {
            std::string list;
            for (const auto& a : available) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError("report: group " + g.describe() + " matches no records; available: " + list);
        }
        return out;
    };
    const auto group_a = select(cfg.report.compare_a);
    const auto group_b = select(cfg.report.compare_b);
    const Eigen::MatrixXd comp = analysis::comparative_matrix(group_a, group_b);
    write_checked(cfg.output_dir / files::kComparative, io::comparative_csv(comp),
                  [&](const std::string& text, const std::string& src) {
                      const io::CsvTable t = io::parse_csv(text, src);
                      if (t.header.size() != static_cast<std::size_t>(C) || t.rows.size() != static_cast<std::size_t>(C)) {
                          self_check_failed(src, "shape");
                      }
                      for (std::size_t r = 0; r < t.rows.size(); ++r) {
                          for (const auto& f : t.rows[r]) io::parse_double(f, src, r + 2);
                      }
                  });
    report["comparative"] = {{"a", cfg.report.compare_a.describe()},
                             {"b", cfg.report.compare_b.describe()},
                             {"a_matrices", group_a.size()},
                             {"b_matrices", group_b.size()},
                             {"file", files::kComparative}};

    if (params.dim() == 2) {
        const analysis::Raster raster = analysis::rasterize_decision_regions(params, cfg.report.raster_resolution);
        write_checked(cfg.output_dir / files::kRasterText, raster.to_text(),
                      [&](const std::string& text, const std::string& src) {
                          const auto n = static_cast<std::size_t>(raster.resolution);
                          if (text.size() != n * (n + 1)) self_check_failed(src, "grid size");
                          for (char ch : text) {
                              const bool ok = ch == '\n' || ch == '.' || (ch >= '0' && ch <= '9') ||
                                              (ch >= 'a' && ch <= 'z') || ch == '#';
                              if (!ok) self_check_failed(src, "unexpected character");
                          }
                      });
        if (cfg.emit_svg) {
            write_checked(cfg.output_dir / files::kRasterSvg, svg::raster_svg(raster),
                          [](const std::string& text, const fs::path& p) { check_svg(text, p); });
        }
        // Region containing each class mean.
        const auto means = sampling::make_class_means(cfg.dataset.num_classes, cfg.dataset.radius,
                                                      geometry::Curvature(cfg.dataset.curvature));
        nlohmann::json regions = nlohmann::json::array();
        for (const auto& mu : means) {
            const auto [row, col] = raster.cell_of(mu[0], mu[1]);
            regions.push_back(raster.label(row, col));
        }
        report["mean_regions"] = std::move(regions);
        report["raster_resolution"] = raster.resolution;
    }

    write_checked(cfg.output_dir / files::kReport, report.dump(2) + "\n", [](const std::string& text, const std::string& src) {
        if (!nlohmann::json::accept(text)) self_check_failed(src, "invalid JSON");
    });
    log << "comparative " << cfg.report.compare_a.describe() << " - " << cfg.report.compare_b.describe() << ":\n"
        << comp << "\n";
}

}  // namespace hypatk::pipeline
