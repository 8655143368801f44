#pragma once

#include "hypatk/geometry.hpp"
#include "hypatk/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace hypatk::sampling {

using geometry::Curvature;
using geometry::PoincarePoint;

class WrappedNormalSpec {
public:
    // Throws ConfigError unless covariance is square, matches mean's
    // dimension, symmetric and positive semi-definite.
    WrappedNormalSpec(PoincarePoint mean, Eigen::MatrixXd covariance);

    const PoincarePoint& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
    // Symmetric square root of the covariance.
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }
    bool isotropic() const noexcept { return isotropic_; }

private:
    PoincarePoint mean_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd factor_;
    bool isotropic_ = false;
    double sigma_ = 0.0;

    friend geometry::Vector draw_tangent(const WrappedNormalSpec&, rng::CounterRng&);
};

// Step 1 of the wrapped-normal procedure: one N(0, Sigma) draw.
geometry::Vector draw_tangent(const WrappedNormalSpec& spec, rng::CounterRng& gen);

// Steps 2-4 for a given origin tangent: transport 0 -> mean, then exp_mean.
PoincarePoint wrap_tangent(const WrappedNormalSpec& spec, const geometry::Vector& origin_tangent,
                           Curvature c, geometry::Diagnostics* diag = nullptr);

struct SampleStats {
    std::size_t clamped = 0;
};

// Sample i is drawn from CounterRng(key_of_sample(i)); the default derives
// per-sample streams from (base_key, i).
std::vector<PoincarePoint> sample_wrapped_normal(const WrappedNormalSpec& spec, std::size_t count,
                                                 std::uint64_t base_key, Curvature c,
                                                 SampleStats* stats = nullptr);

// Means evenly spaced on the circle of hyperbolic radius r in the first two
// coordinates.
std::vector<PoincarePoint> make_class_means(int num_classes, double radius, Curvature c,
                                            Eigen::Index dim = 2);

enum class Split { Train, Test };
const char* split_name(Split s);

struct DatasetSpec {
    int num_classes = 4;
    double radius = 1.5;
    double variance = 0.25;
    std::size_t train_per_class = 10000;
    std::size_t test_per_class = 10000;
    double curvature = 1.0;
    int dim = 2;
    std::uint64_t seed = 20240101;

    void validate() const;
};

struct LabeledDataset {
    std::vector<PoincarePoint> points;
    std::vector<int> labels;  // 0-based
    Split split = Split::Train;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    Eigen::Index dim() const { return points.empty() ? 0 : points.front().dim(); }
};

struct GeneratedData {
    LabeledDataset train;
    LabeledDataset test;
    std::size_t clamped = 0;
};

GeneratedData generate_dataset(const DatasetSpec& spec);

}  // namespace hypatk::sampling
