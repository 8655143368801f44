#pragma once

// Gradient attacks under a hyperbolic-distance budget d_c(x, x~) <= eps.
//
// Hyperbolic (Riemannian) variants move along geodesics with exp_x; the
// Euclidean variants move along straight lines in ball coordinates and pick
// the step length with Newton's method so that the hyperbolic budget is met.

#include "hypatk/geometry.hpp"
#include "hypatk/model.hpp"
#include "hypatk/sampling.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace hypatk::attacks {

using geometry::Curvature;
using geometry::PoincarePoint;
using geometry::Vector;
using model::MlrParams;
using model::ObjectiveKind;

// Gradients with smaller Euclidean norm carry no usable direction.
inline constexpr double kZeroGradient = 1e-12;

enum class Family { EuclideanFgm, HyperbolicFgm, EuclideanPgd, HyperbolicPgd };

inline constexpr Family kAllFamilies[] = {Family::EuclideanFgm, Family::HyperbolicFgm, Family::EuclideanPgd,
                                          Family::HyperbolicPgd};

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);
bool is_pgd(Family f);

struct StepRule {
    enum class Kind { ExactBudget, Fixed };
    Kind kind = Kind::ExactBudget;
    double alpha = 0.0;  // tangent scale for Kind::Fixed

    static StepRule exact_budget() { return {}; }
    static StepRule fixed(double a) { return {Kind::Fixed, a}; }
};

struct NewtonOptions {
    int max_iter = 50;
    // Convergence when |d - eps| <= tol * eps.
    double tol = 1e-10;
};

struct AttackSpec {
    Family family = Family::HyperbolicFgm;
    ObjectiveKind objective = ObjectiveKind::CE;
    double epsilon = 1.0;
    int steps = 1;
    StepRule step_rule;
    NewtonOptions newton;

    // Throws ConfigError; FGM families are normalized to a single step.
    AttackSpec& validate();
};

struct AttackResult {
    PoincarePoint adversarial;
    double achieved_distance = 0.0;
    int steps_taken = 0;
    bool zero_gradient = false;
    bool newton_converged = true;
    bool gradient_tie = false;
    // Largest d_c(x, x~^t) over all iterates (equals achieved_distance for FGM).
    double max_iterate_distance = 0.0;
};

// ---------------------------------------------------------------------------
// Gradient-level building blocks.

struct RootResult {
    double alpha = 0.0;
    bool converged = true;
    int iterations = 0;
};

// Largest alpha keeping x + alpha g inside the margin-clamped ball.
double ray_ball_limit(const Vector& x, const Vector& g, Curvature c);

// d_c(x, x + alpha g) and its derivative in alpha.
struct RayDistance {
    double value;
    double derivative;
};
RayDistance ray_distance(const Vector& x, const Vector& g, double alpha, Curvature c);

// alpha > 0 with d_c(x, x + alpha g) = eps. Newton from eps / (lambda_x ||g||);
// bisection on [0, ray_ball_limit) if Newton leaves the bracket or stalls.
RootResult solve_ray_budget(const PoincarePoint& x, const Vector& g, double eps, Curvature c,
                            const NewtonOptions& newton);

// exp_x(alpha g) with alpha = eps / (lambda_x ||g||).
PoincarePoint geodesic_budget_step(const PoincarePoint& x, const Vector& g, double eps, Curvature c);

// x + alpha g with the Newton-calibrated alpha.
PoincarePoint straight_budget_step(const PoincarePoint& x, const Vector& g, double eps, Curvature c,
                                   const NewtonOptions& newton, bool* converged = nullptr);

// Projection onto {z : d_c(center, z) <= eps} along the Euclidean segment
// from center to y.
PoincarePoint straight_line_projection(const PoincarePoint& center, const PoincarePoint& y, double eps,
                                       Curvature c, const NewtonOptions& newton, bool* converged = nullptr);

// ---------------------------------------------------------------------------
// Attacks on the MLR classifier.

AttackResult fgm_riemannian(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec);
AttackResult fgm_euclidean_l2(const MlrParams& model, const PoincarePoint& x, int label, ObjectiveKind objective,
                              double eps2);
AttackResult fgm_euclidean_hypcal(const MlrParams& model, const PoincarePoint& x, int label,
                                  const AttackSpec& spec);
AttackResult pgd_riemannian(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec);
AttackResult pgd_euclidean(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec);

// Dispatches on spec.family.
AttackResult attack(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec);

// ---------------------------------------------------------------------------
// Models that map raw inputs to the ball with exp_0 before classification.
// The budget is Euclidean in the raw input space.

// alpha with ||log_0(exp_{x_h}(alpha g)) - log_0(x_h)||_2 = eps_img,
// x_h = exp_0(x_img).
RootResult calibrate_pullback_step(const Vector& x_img, const Vector& g, double eps_img, Curvature c,
                                   const NewtonOptions& newton);

struct PullbackResult {
    Vector adversarial_img;
    PoincarePoint adversarial_ball;
    double alpha = 0.0;
    double achieved_img_distance = 0.0;
    bool zero_gradient = false;
    bool newton_converged = true;
};

// Hyperbolic FGM on exp_0(x_img) with the pulled-back budget.
PullbackResult fgm_pullback(const MlrParams& model, const Vector& x_img, int label, ObjectiveKind objective,
                            double eps_img, const NewtonOptions& newton = {});

// ---------------------------------------------------------------------------

struct PredictionRecord {
    std::size_t sample_id = 0;
    int true_label = 0;
    int clean_pred = 0;
    int adv_pred = 0;
    Family family = Family::HyperbolicFgm;
    ObjectiveKind objective = ObjectiveKind::CE;
    double epsilon = 0.0;
    double achieved_distance = 0.0;
    bool zero_gradient = false;
    bool clean_incorrect = false;
};

// Attacks every sample; result i belongs to sample i. A failing sample
// aborts the run with a NumericError naming the lowest failing sample id.
std::vector<AttackResult> attack_all(const AttackSpec& spec, const MlrParams& model,
                                     const sampling::LabeledDataset& data);

std::vector<PredictionRecord> run_attack(const AttackSpec& spec, const MlrParams& model,
                                         const sampling::LabeledDataset& data,
                                         const std::vector<int>* clean_predictions = nullptr);

}  // namespace hypatk::attacks
