#pragma once

// Hyperbolic multinomial logistic regression on the Poincare ball.
//
// Class k owns a geodesic hyperplane through p_k with normal a_k; its logit
// is the hyperplane's signed-distance form
//
//   logit_k(x) = (lambda_{p_k} ||a_k|| / sqrt c)
//                * asinh(2 sqrt c <z, a_k> / ((1 - c||z||^2) ||a_k||)),  z = -p_k (+) x.

#include "hypatk/geometry.hpp"
#include "hypatk/kernels.hpp"
#include "hypatk/sampling.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypatk::model {

using geometry::Curvature;
using geometry::PoincarePoint;
using geometry::TangentVector;
using geometry::Vector;

enum class ObjectiveKind { CE, NFL, SL, LL };

inline constexpr ObjectiveKind kAllObjectives[] = {ObjectiveKind::CE, ObjectiveKind::NFL, ObjectiveKind::SL,
                                                   ObjectiveKind::LL};

std::string_view objective_name(ObjectiveKind kind);
std::optional<ObjectiveKind> parse_objective(std::string_view name);

struct MlrParams {
    Curvature curvature{1.0};
    std::vector<PoincarePoint> p;
    std::vector<Vector> a;

    int num_classes() const noexcept { return static_cast<int>(p.size()); }
    Eigen::Index dim() const noexcept { return p.empty() ? 0 : p.front().dim(); }

    // ConfigError on zero normals, points outside the ball, shape mismatch.
    void validate() const;
    kernels::MlrPlanes planes() const;
};

// p_k = exp_0(0.01 u_k), a_k = unit-normalized standard normal.
MlrParams init_params(int num_classes, Eigen::Index dim, Curvature c, std::uint64_t seed);

Vector mlr_logits(const MlrParams& params, const PoincarePoint& x);

// Index of the largest entry, lowest index on ties.
int argmax(const Vector& v);
int predict(const MlrParams& params, const PoincarePoint& x);

// Batched evaluation through the active SIMD kernel. Logits are returned
// class-major: out[k * n + i].
std::vector<double> logits_batch(const MlrParams& params, const kernels::PointsSoA& points);
std::vector<int> predict_batch(const MlrParams& params, const kernels::PointsSoA& points);
std::vector<int> predict_batch(const MlrParams& params, std::span<const PoincarePoint> points);
kernels::PointsSoA to_soa(std::span<const PoincarePoint> points);

struct ObjectiveEval {
    double value = 0.0;
    Vector dlogits;    // gradient of the objective with respect to the logits
    bool tie = false;  // the max/second/min selection was ambiguous
};

double objective_value(ObjectiveKind kind, const Vector& logits, int label);
ObjectiveEval objective_with_grad(ObjectiveKind kind, const Vector& logits, int label);

struct InputGradient {
    TangentVector grad;  // Euclidean gradient in ball coordinates, attached at x
    double objective = 0.0;
    bool tie = false;
};

InputGradient grad_input(ObjectiveKind kind, const MlrParams& params, const PoincarePoint& x, int label);

// Jacobian of the logits with respect to x, one row per class.
Eigen::MatrixXd logit_jacobian(const MlrParams& params, const PoincarePoint& x);

struct ParamGradients {
    std::vector<Vector> p;
    std::vector<Vector> a;
    double loss = 0.0;  // mean cross-entropy over the batch

    void scale(double s);
};

// Mean cross-entropy gradients over the samples named by indices. The sum is
// taken in ascending sample index, so the result does not depend on the
// order of indices.
ParamGradients grad_params(const MlrParams& params, std::span<const PoincarePoint> points,
                           std::span<const int> labels, std::span<const std::size_t> indices);

MlrParams rsgd_step(const MlrParams& params, const ParamGradients& grads, double lr);

enum class LossReduction { Sum, Mean };

struct TrainConfig {
    double learning_rate = 5e-5;
    std::size_t batch_size = 4096;
    int epochs = 100;
    std::uint64_t seed = 7;
    // Sum: the step uses the gradient of the batch-summed loss.
    LossReduction reduction = LossReduction::Sum;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double mean_ce = 0.0;        // over the whole training set after the epoch
    double train_accuracy = 0.0; // ditto
};

struct TrainResult {
    MlrParams params;
    std::vector<EpochStats> history;
};

TrainResult train(const sampling::LabeledDataset& data, int num_classes, Curvature c, const TrainConfig& config);

// Mean cross-entropy and accuracy of params on a dataset (batched kernels).
struct Evaluation {
    double mean_ce = 0.0;
    double accuracy = 0.0;
};
Evaluation evaluate(const MlrParams& params, const sampling::LabeledDataset& data);

}  // namespace hypatk::model
