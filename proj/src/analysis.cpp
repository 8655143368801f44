#include "hypatk/analysis.hpp"

#include "hypatk/error.hpp"
#include "hypatk/kernels.hpp"

#include <cmath>
#include <string>

namespace hypatk::analysis {

double accuracy(std::span<const PredictionRecord> records) {
    if (records.empty()) throw DataError("accuracy: no records");
    std::size_t correct = 0;
    for (const auto& r : records) correct += r.adv_pred == r.true_label;
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

MisclassMatrix misclass_matrix(std::span<const PredictionRecord> records, int num_classes) {
    if (num_classes < 1) throw ConfigError("misclass_matrix: num_classes must be >= 1");
    const auto C = static_cast<Eigen::Index>(num_classes);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(C, C);
    for (const auto& r : records) {
        if (r.true_label < 0 || r.true_label >= num_classes || r.adv_pred < 0 || r.adv_pred >= num_classes) {
            throw DataError("misclass_matrix: label out of range in sample " + std::to_string(r.sample_id));
        }
        if (r.adv_pred != r.true_label) counts(r.true_label, r.adv_pred) += 1.0;
    }
    MisclassMatrix m{Eigen::MatrixXd::Zero(C, C), std::vector<std::size_t>(static_cast<std::size_t>(C), 0)};
    for (Eigen::Index i = 0; i < C; ++i) {
        const double total = counts.row(i).sum();
        m.row_counts[static_cast<std::size_t>(i)] = static_cast<std::size_t>(total);
        if (total > 0.0) m.values.row(i) = counts.row(i) / total;
    }
    return m;
}

namespace {

Eigen::MatrixXd mean_of(std::span<const MisclassMatrix> mats, int C, const char* which) {
    if (mats.empty()) throw ConfigError(std::string("comparative_matrix: group ") + which + " is empty");
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(C, C);
    for (const auto& m : mats) {
        if (m.num_classes() != C) throw ConfigError("comparative_matrix: class counts differ");
        sum += m.values;
    }
    return sum / static_cast<double>(mats.size());
}

}  // namespace

Eigen::MatrixXd comparative_matrix(std::span<const MisclassMatrix> a, std::span<const MisclassMatrix> b) {
    if (a.empty() || b.empty()) throw ConfigError("comparative_matrix: empty group");
    const int C = a.front().num_classes();
    return mean_of(a, C, "a") - mean_of(b, C, "b");
}

// ---------------------------------------------------------------------------

void SweepGrid::validate() const {
    if (families.empty()) throw ConfigError("sweep: no attack families");
    if (objectives.empty()) throw ConfigError("sweep: no objectives");
    if (epsilons.empty()) throw ConfigError("sweep: empty epsilon grid");
    for (double e : epsilons) {
        if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("sweep: epsilons must be positive");
    }
    if (pgd_steps < 1) throw ConfigError("sweep: pgd steps must be >= 1");
    if (!(pgd_step_scale >= 0.0) || !std::isfinite(pgd_step_scale)) {
        throw ConfigError("sweep: pgd step scale must be >= 0");
    }
}

attacks::AttackSpec SweepGrid::spec(Family family, ObjectiveKind objective, double epsilon) const {
    attacks::AttackSpec s;
    s.family = family;
    s.objective = objective;
    s.epsilon = epsilon;
    s.newton = newton;
    if (attacks::is_pgd(family)) {
        s.steps = pgd_steps;
        s.step_rule = pgd_step_scale > 0.0 ? attacks::StepRule::fixed(pgd_step_scale * epsilon)
                                           : attacks::StepRule::exact_budget();
    }
    return s.validate();
}

SweepResult epsilon_sweep(const model::MlrParams& model, const sampling::LabeledDataset& data,
                          const SweepGrid& grid, const RecordSink& sink) {
    grid.validate();
    if (data.empty()) throw DataError("sweep: empty dataset");
    const std::vector<int> clean = model::predict_batch(model, data.points);

    SweepResult result;
    for (Family f : grid.families) {
        for (ObjectiveKind o : grid.objectives) {
            for (double eps : grid.epsilons) {
                const attacks::AttackSpec spec = grid.spec(f, o, eps);
                std::vector<PredictionRecord> records = attacks::run_attack(spec, model, data, &clean);
                SweepRow row{f, o, eps, records.size(), 0, 0.0};
                for (const auto& r : records) row.n_correct += r.adv_pred == r.true_label;
                row.accuracy = static_cast<double>(row.n_correct) / static_cast<double>(row.n_samples);
                result.rows.push_back(row);
                if (sink) sink(spec, std::move(records));
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

Eigen::Vector2d Raster::center(int row, int col) const {
    const double h = 2.0 * extent / resolution;
    return {-extent + (col + 0.5) * h, extent - (row + 0.5) * h};
}

std::pair<int, int> Raster::cell_of(double x, double y) const {
    const double h = 2.0 * extent / resolution;
    auto clampi = [&](double v) { return std::min(resolution - 1, std::max(0, static_cast<int>(std::floor(v)))); };
    return {clampi((extent - y) / h), clampi((x + extent) / h)};
}

char label_char(int label) {
    if (label < 0) return '.';
    if (label < 10) return static_cast<char>('0' + label);
    if (label < 36) return static_cast<char>('a' + label - 10);
    return '#';
}

std::string Raster::to_text() const {
    std::string out;
    out.reserve(static_cast<std::size_t>(resolution) * (resolution + 1));
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) out.push_back(label_char(label(r, c)));
        out.push_back('\n');
    }
    return out;
}

Raster rasterize_decision_regions(const model::MlrParams& model, int resolution) {
    if (model.dim() != 2) {
        throw ConfigError("rasterize: unsupported dimension " + std::to_string(model.dim()) + " (need 2)");
    }
    if (resolution < 2) throw ConfigError("rasterize: resolution must be >= 2");
    const double rmax = model.curvature.max_radius();

    Raster raster;
    raster.resolution = resolution;
    raster.extent = 1.0 / model.curvature.sqrt();
    const std::size_t cells = static_cast<std::size_t>(resolution) * resolution;
    raster.labels.assign(cells, -1);
    raster.traces.assign(cells, false);

    // Gather in-ball cell centres and evaluate them in one batch.
    std::vector<std::size_t> inside;
    kernels::PointsSoA soa;
    soa.dim = 2;
    std::vector<double> xs, ys;
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            const Eigen::Vector2d p = raster.center(r, c);
            if (p.norm() < rmax) {
                inside.push_back(static_cast<std::size_t>(r) * resolution + c);
                xs.push_back(p.x());
                ys.push_back(p.y());
            }
        }
    }
    const std::size_t n = inside.size();
    soa.count = n;
    soa.data = xs;
    soa.data.insert(soa.data.end(), ys.begin(), ys.end());
    const std::vector<double> logits = model::logits_batch(model, soa);
    const std::size_t C = static_cast<std::size_t>(model.num_classes());

    std::vector<long> slot(cells, -1);
    for (std::size_t i = 0; i < n; ++i) {
        slot[inside[i]] = static_cast<long>(i);
        int best = 0;
        for (std::size_t k = 1; k < C; ++k) {
            if (logits[k * n + i] > logits[static_cast<std::size_t>(best) * n + i]) best = static_cast<int>(k);
        }
        raster.labels[inside[i]] = best;
    }

    auto sign_change = [&](long i, long j) {
        for (std::size_t k = 0; k < C; ++k) {
            const double a = logits[k * n + static_cast<std::size_t>(i)];
            const double b = logits[k * n + static_cast<std::size_t>(j)];
            if ((a < 0.0) != (b < 0.0)) return true;
        }
        return false;
    };
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) {
            const std::size_t idx = static_cast<std::size_t>(r) * resolution + c;
            if (slot[idx] < 0) continue;
            if (c + 1 < resolution && slot[idx + 1] >= 0 && sign_change(slot[idx], slot[idx + 1])) {
                raster.traces[idx] = true;
            }
            if (r + 1 < resolution && slot[idx + resolution] >= 0 && sign_change(slot[idx], slot[idx + resolution])) {
                raster.traces[idx] = true;
            }
        }
    }
    return raster;
}

}  // namespace hypatk::analysis
