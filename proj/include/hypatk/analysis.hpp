#pragma once

// Accuracy sweeps, misclassification matrices and decision-region rasters.

#include "hypatk/attacks.hpp"
#include "hypatk/model.hpp"
#include "hypatk/sampling.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hypatk::analysis {

using attacks::Family;
using attacks::PredictionRecord;
using model::ObjectiveKind;

// Fraction of records with adv_pred == true_label. DataError when empty.
double accuracy(std::span<const PredictionRecord> records);

// M(i, j): share of the misclassified class-i samples predicted as j.
struct MisclassMatrix {
    Eigen::MatrixXd values;
    std::vector<std::size_t> row_counts;

    int num_classes() const noexcept { return static_cast<int>(values.rows()); }
};

MisclassMatrix misclass_matrix(std::span<const PredictionRecord> records, int num_classes);

// mean(a) - mean(b). ConfigError on empty input or differing class counts.
Eigen::MatrixXd comparative_matrix(std::span<const MisclassMatrix> a, std::span<const MisclassMatrix> b);

struct SweepGrid {
    std::vector<Family> families;
    std::vector<ObjectiveKind> objectives;
    std::vector<double> epsilons;
    int pgd_steps = 10;
    // PGD uses the fixed rule alpha = pgd_step_scale * eps; 0 selects exact_budget.
    double pgd_step_scale = 0.5;
    attacks::NewtonOptions newton;

    void validate() const;
    attacks::AttackSpec spec(Family family, ObjectiveKind objective, double epsilon) const;
};

struct SweepRow {
    Family family = Family::HyperbolicFgm;
    ObjectiveKind objective = ObjectiveKind::CE;
    double epsilon = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_correct = 0;
    double accuracy = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Receives the records of every grid cell, in row order.
using RecordSink = std::function<void(const attacks::AttackSpec&, std::vector<PredictionRecord>&&)>;

// Rows are ordered family-major, then objective, then epsilon as listed.
SweepResult epsilon_sweep(const model::MlrParams& model, const sampling::LabeledDataset& data,
                          const SweepGrid& grid, const RecordSink& sink = {});

struct Raster {
    int resolution = 0;
    double extent = 0.0;        // grid spans [-extent, extent]^2
    std::vector<int> labels;    // row-major, row 0 at +y; -1 outside the ball
    std::vector<bool> traces;   // some logit changes sign towards a neighbour cell

    int label(int row, int col) const { return labels[static_cast<std::size_t>(row) * resolution + col]; }
    bool trace(int row, int col) const { return traces[static_cast<std::size_t>(row) * resolution + col]; }
    // Centre of a cell in ball coordinates.
    Eigen::Vector2d center(int row, int col) const;
    // Cell containing a point of the square.
    std::pair<int, int> cell_of(double x, double y) const;
    // One line per row; class id characters, '.' outside the ball.
    std::string to_text() const;
};

char label_char(int label);

// ConfigError unless the model is two-dimensional and resolution >= 2.
Raster rasterize_decision_regions(const model::MlrParams& model, int resolution);

}  // namespace hypatk::analysis
