#include "hypatk/analysis.hpp"
#include "hypatk/error.hpp"

#include "oracle/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace hypatk;
using namespace hypatk::analysis;

namespace {

const geometry::Curvature kC1(1.0);

std::vector<PredictionRecord> random_records(std::mt19937_64& rng, std::size_t n, int C, double error_rate) {
    std::uniform_int_distribution<int> cls(0, C - 1);
    std::bernoulli_distribution wrong(error_rate);
    std::vector<PredictionRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = out[i];
        r.sample_id = i;
        r.true_label = cls(rng);
        r.clean_pred = cls(rng);
        r.adv_pred = wrong(rng) ? cls(rng) : r.true_label;
        r.clean_incorrect = r.clean_pred != r.true_label;
    }
    return out;
}

sampling::LabeledDataset small_dataset(std::mt19937_64& rng, std::size_t n, int C) {
    sampling::LabeledDataset d;
    for (std::size_t i = 0; i < n; ++i) {
        d.points.push_back(testsupport::random_point(rng, 2, kC1, 0.85));
        d.labels.push_back(static_cast<int>(i % static_cast<std::size_t>(C)));
    }
    return d;
}

}  // namespace

TEST(Accuracy, CountsMatches) {
    std::vector<PredictionRecord> recs(4);
    for (int i = 0; i < 4; ++i) {
        recs[i].true_label = i % 2;
        recs[i].adv_pred = i < 3 ? i % 2 : 0;
    }
    EXPECT_DOUBLE_EQ(accuracy(recs), 0.75);
    EXPECT_THROW(accuracy({}), DataError);
}

TEST(MisclassMatrix, MatchesBruteForceCounts) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const int C = 2 + trial % 6;
        const auto recs = random_records(rng, 1 + rng() % 400, C, 0.05 + 0.9 * (trial % 10) / 10.0);
        std::vector<std::pair<int, int>> pairs;
        for (const auto& r : recs) pairs.emplace_back(r.true_label, r.adv_pred);
        const auto counts = oracle::count_errors(pairs);
        const MisclassMatrix m = misclass_matrix(recs, C);
        for (int i = 0; i < C; ++i) {
            int row_total = 0;
            for (int j = 0; j < C; ++j) {
                auto it = counts.find({i, j});
                row_total += it == counts.end() ? 0 : it->second;
            }
            ASSERT_EQ(m.row_counts[i], static_cast<std::size_t>(row_total));
            EXPECT_EQ(m.values(i, i), 0.0);
            if (row_total == 0) {
                EXPECT_EQ(m.values.row(i).cwiseAbs().sum(), 0.0);
                continue;
            }
            EXPECT_NEAR(m.values.row(i).sum(), 1.0, 1e-12);
            for (int j = 0; j < C; ++j) {
                auto it = counts.find({i, j});
                const double expected = it == counts.end() ? 0.0 : double(it->second) / row_total;
                EXPECT_DOUBLE_EQ(m.values(i, j), expected);
            }
        }
    }
}

TEST(MisclassMatrix, RejectsOutOfRangeLabels) {
    std::vector<PredictionRecord> recs(1);
    recs[0].adv_pred = 3;
    EXPECT_THROW(misclass_matrix(recs, 3), DataError);
    EXPECT_THROW(misclass_matrix(recs, 0), ConfigError);
}

TEST(Comparative, IdenticalGroupsGiveZero) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<MisclassMatrix> group;
        for (int k = 0; k < 1 + trial % 4; ++k) group.push_back(misclass_matrix(random_records(rng, 300, 4, 0.4), 4));
        EXPECT_EQ(comparative_matrix(group, group).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Comparative, IsDifferenceOfMeans) {
    std::mt19937_64 rng(3);
    std::vector<MisclassMatrix> a, b;
    for (int k = 0; k < 3; ++k) a.push_back(misclass_matrix(random_records(rng, 200, 3, 0.5), 3));
    b.push_back(misclass_matrix(random_records(rng, 200, 3, 0.5), 3));
    const Eigen::MatrixXd expected = (a[0].values + a[1].values + a[2].values) / 3.0 - b[0].values;
    EXPECT_LT((comparative_matrix(a, b) - expected).cwiseAbs().maxCoeff(), 1e-15);
    std::vector<MisclassMatrix> other{misclass_matrix(random_records(rng, 50, 4, 0.5), 4)};
    EXPECT_THROW(comparative_matrix(a, other), ConfigError);
    EXPECT_THROW(comparative_matrix(a, {}), ConfigError);
}

TEST(Sweep, RowsFollowGridOrder) {
    std::mt19937_64 rng(4);
    const auto params = testsupport::random_params(rng, 3, 2, kC1);
    const auto data = small_dataset(rng, 60, 3);
    SweepGrid grid;
    grid.families = {attacks::Family::HyperbolicPgd, attacks::Family::EuclideanFgm};
    grid.objectives = {model::ObjectiveKind::LL, model::ObjectiveKind::CE};
    grid.epsilons = {0.5, 0.25, 1.0};
    grid.pgd_steps = 3;
    std::vector<attacks::AttackSpec> seen;
    std::vector<double> sink_acc;
    const SweepResult res =
        epsilon_sweep(params, data, grid, [&](const attacks::AttackSpec& spec, std::vector<PredictionRecord>&& recs) {
            seen.push_back(spec);
            sink_acc.push_back(accuracy(recs));
        });
    ASSERT_EQ(res.rows.size(), 12u);
    ASSERT_EQ(seen.size(), 12u);
    std::size_t i = 0;
    for (auto f : grid.families) {
        for (auto o : grid.objectives) {
            for (double eps : grid.epsilons) {
                const SweepRow& row = res.rows[i];
                EXPECT_EQ(row.family, f);
                EXPECT_EQ(row.objective, o);
                EXPECT_EQ(row.epsilon, eps);
                EXPECT_EQ(row.n_samples, data.size());
                EXPECT_DOUBLE_EQ(row.accuracy, double(row.n_correct) / double(row.n_samples));
                EXPECT_EQ(row.accuracy, sink_acc[i]);
                EXPECT_EQ(seen[i].steps, attacks::is_pgd(f) ? 3 : 1);
                ++i;
            }
        }
    }
}

TEST(Sweep, GridValidation) {
    SweepGrid grid;
    grid.families = {attacks::Family::HyperbolicFgm};
    grid.objectives = {model::ObjectiveKind::CE};
    EXPECT_THROW(grid.validate(), ConfigError);
    grid.epsilons = {0.5, -1.0};
    EXPECT_THROW(grid.validate(), ConfigError);
    grid.epsilons = {0.5};
    EXPECT_NO_THROW(grid.validate());
    const auto spec = grid.spec(attacks::Family::EuclideanPgd, model::ObjectiveKind::SL, 0.8);
    EXPECT_EQ(spec.step_rule.kind, attacks::StepRule::Kind::Fixed);
    EXPECT_DOUBLE_EQ(spec.step_rule.alpha, 0.4);
}

TEST(Raster, PartitionsTheDiskAndAgreesWithPredict) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const auto params = testsupport::random_params(rng, 4, 2, kC1);
        const int res = 41 + 10 * trial;
        const Raster r = rasterize_decision_regions(params, res);
        ASSERT_EQ(r.labels.size(), static_cast<std::size_t>(res * res));
        std::size_t inside = 0;
        for (int row = 0; row < res; ++row) {
            for (int col = 0; col < res; ++col) {
                const Eigen::Vector2d ctr = r.center(row, col);
                const bool in_ball = ctr.norm() <= kC1.max_radius();
                ASSERT_EQ(r.label(row, col) >= 0, in_ball) << row << "," << col;
                if (!in_ball) continue;
                ++inside;
                EXPECT_EQ(r.label(row, col), model::predict(params, geometry::PoincarePoint(geometry::Vector(ctr))));
                EXPECT_EQ(r.cell_of(ctr.x(), ctr.y()), std::make_pair(row, col));
            }
        }
        // Cell area times count approximates the disk area.
        const double cell = 2.0 * r.extent / res;
        EXPECT_NEAR(inside * cell * cell, M_PI, 0.15);
    }
}

TEST(Raster, TopRowIsPositiveY) {
    std::mt19937_64 rng(6);
    const Raster r = rasterize_decision_regions(testsupport::random_params(rng, 2, 2, kC1), 11);
    EXPECT_GT(r.center(0, 5).y(), 0.0);
    EXPECT_LT(r.center(0, 0).x(), 0.0);
}

TEST(Raster, SingleClassHasOneRegionAndNoTraceBetweenLabels) {
    model::MlrParams params;
    params.p.push_back(geometry::PoincarePoint::origin(2));
    params.a.push_back(geometry::Vector::Unit(2, 1));
    const Raster r = rasterize_decision_regions(params, 31);
    std::set<int> regions;
    for (int l : r.labels) {
        if (l >= 0) regions.insert(l);
    }
    EXPECT_EQ(regions, std::set<int>{0});
    const std::string text = r.to_text();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 31);
    EXPECT_EQ(text.find_first_not_of(".0\n"), std::string::npos);
}

TEST(Raster, LabelChars) {
    EXPECT_EQ(label_char(-1), '.');
    EXPECT_EQ(label_char(3), '3');
    EXPECT_EQ(label_char(10), 'a');
    EXPECT_EQ(label_char(35), 'z');
    EXPECT_EQ(label_char(36), '#');
}

TEST(Raster, RejectsBadInput) {
    std::mt19937_64 rng(7);
    EXPECT_THROW(rasterize_decision_regions(testsupport::random_params(rng, 3, 3, kC1), 10), ConfigError);
    EXPECT_THROW(rasterize_decision_regions(testsupport::random_params(rng, 3, 2, kC1), 1), ConfigError);
}
