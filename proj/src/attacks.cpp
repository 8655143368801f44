#include "hypatk/attacks.hpp"

#include "hypatk/error.hpp"
#include "hypatk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hypatk::attacks {

namespace {

// Iterates this close to the budget are left alone by the PGD projections;
// re-projecting them would only reshuffle rounding error.
constexpr double kProjectionSlack = 1e-12;
constexpr int kBisectionIterations = 200;

using geometry::distance;

}  // namespace

std::string_view family_name(Family f) {
    switch (f) {
        case Family::EuclideanFgm: return "euclidean_fgm";
        case Family::HyperbolicFgm: return "hyperbolic_fgm";
        case Family::EuclideanPgd: return "euclidean_pgd";
        case Family::HyperbolicPgd: return "hyperbolic_pgd";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view name) {
    for (Family f : kAllFamilies) {
        if (family_name(f) == name) return f;
    }
    return std::nullopt;
}

bool is_pgd(Family f) { return f == Family::EuclideanPgd || f == Family::HyperbolicPgd; }

AttackSpec& AttackSpec::validate() {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("attack: epsilon must be positive");
    if (!is_pgd(family)) steps = 1;
    if (steps < 1) throw ConfigError("attack: steps must be >= 1");
    if (step_rule.kind == StepRule::Kind::Fixed && !(step_rule.alpha > 0.0)) {
        throw ConfigError("attack: fixed step size must be positive");
    }
    if (newton.max_iter < 1 || !(newton.tol > 0.0)) throw ConfigError("attack: invalid Newton options");
    return *this;
}

// ---------------------------------------------------------------------------

double ray_ball_limit(const Vector& x, const Vector& g, Curvature c) {
    const double r = c.max_radius();
    const double room = r * r - x.squaredNorm();
    const double gg = g.squaredNorm();
    const double b = x.dot(g);
    if (room <= 0.0) return 0.0;
    const double disc = std::sqrt(b * b + gg * room);
    return b > 0.0 ? room / (b + disc) : (disc - b) / gg;
}

RayDistance ray_distance(const Vector& x, const Vector& g, double alpha, Curvature c) {
    // cosh(sqrt(c) d) = 1 + q,  q = 2 c alpha^2 ||g||^2 / ((1 - c||x||^2)(1 - c||x + alpha g||^2))
    const double k = c.value();
    const double gg = g.squaredNorm();
    const double b = x.dot(g);
    const double a_term = 1.0 - k * x.squaredNorm();
    const double b_term = 1.0 - k * (x.squaredNorm() + 2.0 * alpha * b + alpha * alpha * gg);
    const double q = 2.0 * k * alpha * alpha * gg / (a_term * b_term);
    const double root = std::sqrt(q * (q + 2.0));
    const double value = std::log1p(q + root) / c.sqrt();
    const double dq = (2.0 * k * gg / a_term) *
                      (2.0 * alpha * b_term + 2.0 * k * alpha * alpha * (b + alpha * gg)) / (b_term * b_term);
    const double derivative = root > 0.0 ? dq / (c.sqrt() * root) : 2.0 * std::sqrt(gg) / a_term;
    return {value, derivative};
}

namespace {

// Safeguarded scalar root finder shared by the straight-line and pullback
// calibrations for increasing f. Newton from `guess`; a Newton step that
// leaves the current bracket is replaced by a bisection step. If max_iter
// runs out, plain bisection on [0, hi] finishes the job.
template <class Fn>
RootResult newton_then_bisect(Fn&& f, double guess, double hi, double target, const NewtonOptions& opt) {
    const double tol = opt.tol * target;
    RootResult out;
    double lo_b = 0.0;
    double up_b = hi;
    double alpha = (guess > 0.0 && guess < hi) ? guess : 0.5 * hi;
    for (int it = 0; it < opt.max_iter; ++it) {
        out.iterations = it + 1;
        if (!(alpha > lo_b) || !(alpha < up_b)) break;
        const auto [value, slope] = f(alpha);
        const double residual = value - target;
        if (!std::isfinite(residual)) break;
        (residual < 0.0 ? lo_b : up_b) = alpha;
        const double next = alpha - residual / slope;
        const bool newton_ok = std::isfinite(slope) && slope > 0.0 && next > lo_b && next < up_b;
        if (std::abs(residual) <= tol) {
            // One polishing step; quadratic convergence takes it to rounding level.
            out.alpha = newton_ok ? next : alpha;
            out.converged = true;
            return out;
        }
        alpha = newton_ok ? next : 0.5 * (lo_b + up_b);
    }

    out.converged = false;
    double lo = 0.0;
    double up = hi;
    if (f(up).value - target < 0.0) {
        out.alpha = up;
        return out;
    }
    for (int it = 0; it < kBisectionIterations && up - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + up);
        if (mid <= lo || mid >= up) break;
        if (f(mid).value - target < 0.0) {
            lo = mid;
        } else {
            up = mid;
        }
    }
    out.alpha = 0.5 * (lo + up);
    return out;
}

}  // namespace

RootResult solve_ray_budget(const PoincarePoint& x, const Vector& g, double eps, Curvature c,
                            const NewtonOptions& newton) {
    const double gn = g.norm();
    if (!(gn > 0.0)) throw NumericError("solve_ray_budget: zero direction");
    const double hi = ray_ball_limit(x.coords(), g, c);
    const double guess = eps / (geometry::conformal_factor(x, c) * gn);
    auto f = [&](double alpha) { return ray_distance(x.coords(), g, alpha, c); };
    return newton_then_bisect(f, guess, hi, eps, newton);
}

PoincarePoint geodesic_budget_step(const PoincarePoint& x, const Vector& g, double eps, Curvature c) {
    const double alpha = eps / (geometry::conformal_factor(x, c) * g.norm());
    return geometry::exp_map(x, alpha * g, c);
}

PoincarePoint straight_budget_step(const PoincarePoint& x, const Vector& g, double eps, Curvature c,
                                   const NewtonOptions& newton, bool* converged) {
    const RootResult root = solve_ray_budget(x, g, eps, c, newton);
    if (converged) *converged = root.converged;
    return geometry::project_into_ball(x.coords() + root.alpha * g, c);
}

PoincarePoint straight_line_projection(const PoincarePoint& center, const PoincarePoint& y, double eps,
                                       Curvature c, const NewtonOptions& newton, bool* converged) {
    if (converged) *converged = true;
    if (distance(center, y, c) <= eps) return y;
    const Vector dir = y.coords() - center.coords();
    const RootResult root = solve_ray_budget(center, dir, eps, c, newton);
    if (converged) *converged = root.converged;
    return geometry::project_into_ball(center.coords() + std::min(root.alpha, 1.0) * dir, c);
}

// ---------------------------------------------------------------------------

namespace {

AttackResult unchanged(const PoincarePoint& x, bool tie) {
    AttackResult r;
    r.adversarial = x;
    r.zero_gradient = true;
    r.gradient_tie = tie;
    return r;
}

AttackResult finish(const PoincarePoint& x, PoincarePoint adv, Curvature c, int steps, bool converged, bool tie) {
    AttackResult r;
    r.achieved_distance = distance(x, adv, c);
    r.max_iterate_distance = r.achieved_distance;
    r.adversarial = std::move(adv);
    r.steps_taken = steps;
    r.newton_converged = converged;
    r.gradient_tie = tie;
    return r;
}

}  // namespace

AttackResult fgm_riemannian(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec) {
    const Curvature c = model.curvature;
    const model::InputGradient ig = model::grad_input(spec.objective, model, x, label);
    if (ig.grad.vec.norm() < kZeroGradient) return unchanged(x, ig.tie);
    return finish(x, geodesic_budget_step(x, ig.grad.vec, spec.epsilon, c), c, 1, true, ig.tie);
}

AttackResult fgm_euclidean_l2(const MlrParams& model, const PoincarePoint& x, int label, ObjectiveKind objective,
                              double eps2) {
    const Curvature c = model.curvature;
    const model::InputGradient ig = model::grad_input(objective, model, x, label);
    const double gn = ig.grad.vec.norm();
    if (gn < kZeroGradient) return unchanged(x, ig.tie);
    if (eps2 == 0.0) return finish(x, x, c, 1, true, ig.tie);
    return finish(x, geometry::project_into_ball(x.coords() + (eps2 / gn) * ig.grad.vec, c), c, 1, true, ig.tie);
}

AttackResult fgm_euclidean_hypcal(const MlrParams& model, const PoincarePoint& x, int label,
                                  const AttackSpec& spec) {
    const Curvature c = model.curvature;
    const model::InputGradient ig = model::grad_input(spec.objective, model, x, label);
    if (ig.grad.vec.norm() < kZeroGradient) return unchanged(x, ig.tie);
    bool converged = true;
    PoincarePoint adv = straight_budget_step(x, ig.grad.vec, spec.epsilon, c, spec.newton, &converged);
    return finish(x, std::move(adv), c, 1, converged, ig.tie);
}

AttackResult pgd_riemannian(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec) {
    const Curvature c = model.curvature;
    const double eps = spec.epsilon;
    AttackResult r;
    PoincarePoint cur = x;
    for (int t = 0; t < spec.steps; ++t) {
        const model::InputGradient ig = model::grad_input(spec.objective, model, cur, label);
        r.gradient_tie = r.gradient_tie || ig.tie;
        const Vector& g = ig.grad.vec;
        if (g.norm() < kZeroGradient) {
            r.zero_gradient = true;
            break;
        }
        PoincarePoint next = spec.step_rule.kind == StepRule::Kind::ExactBudget
                                 ? geodesic_budget_step(cur, g, eps, c)
                                 : geometry::exp_map(cur, spec.step_rule.alpha * g, c);
        if (distance(x, next, c) > eps * (1.0 + kProjectionSlack)) {
            next = geometry::project_to_hyperbolic_ball(x, next, eps, c);
        }
        cur = std::move(next);
        ++r.steps_taken;
        r.max_iterate_distance = std::max(r.max_iterate_distance, distance(x, cur, c));
    }
    r.achieved_distance = distance(x, cur, c);
    r.adversarial = std::move(cur);
    return r;
}

AttackResult pgd_euclidean(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec) {
    const Curvature c = model.curvature;
    const double eps = spec.epsilon;
    AttackResult r;
    PoincarePoint cur = x;
    for (int t = 0; t < spec.steps; ++t) {
        const model::InputGradient ig = model::grad_input(spec.objective, model, cur, label);
        r.gradient_tie = r.gradient_tie || ig.tie;
        const Vector& g = ig.grad.vec;
        if (g.norm() < kZeroGradient) {
            r.zero_gradient = true;
            break;
        }
        bool converged = true;
        PoincarePoint next = spec.step_rule.kind == StepRule::Kind::ExactBudget
                                 ? straight_budget_step(cur, g, eps, c, spec.newton, &converged)
                                 : geometry::project_into_ball(cur.coords() + spec.step_rule.alpha * g, c);
        r.newton_converged = r.newton_converged && converged;
        if (distance(x, next, c) > eps * (1.0 + kProjectionSlack)) {
            next = straight_line_projection(x, next, eps, c, spec.newton, &converged);
            r.newton_converged = r.newton_converged && converged;
        }
        cur = std::move(next);
        ++r.steps_taken;
        r.max_iterate_distance = std::max(r.max_iterate_distance, distance(x, cur, c));
    }
    r.achieved_distance = distance(x, cur, c);
    r.adversarial = std::move(cur);
    return r;
}

AttackResult attack(const MlrParams& model, const PoincarePoint& x, int label, const AttackSpec& spec) {
    switch (spec.family) {
        case Family::EuclideanFgm: return fgm_euclidean_hypcal(model, x, label, spec);
        case Family::HyperbolicFgm: return fgm_riemannian(model, x, label, spec);
        case Family::EuclideanPgd: return pgd_euclidean(model, x, label, spec);
        case Family::HyperbolicPgd: return pgd_riemannian(model, x, label, spec);
    }
    throw ConfigError("attack: unknown family");
}

// ---------------------------------------------------------------------------

RootResult calibrate_pullback_step(const Vector& x_img, const Vector& g, double eps_img, Curvature c,
                                   const NewtonOptions& newton) {
    geometry::check_same_dim(x_img, g, "calibrate_pullback_step");
    if (!x_img.allFinite()) throw NumericError("calibrate_pullback_step: non-finite input");
    if (eps_img == 0.0) return {0.0, true, 0};
    const double gn = g.norm();
    if (!(gn > 0.0)) throw NumericError("calibrate_pullback_step: zero gradient");

    const PoincarePoint xh = geometry::exp_origin(x_img, c);
    const Vector ref = geometry::log_origin(xh, c);
    const Vector g_unit = g / gn;
    const double lambda = geometry::conformal_factor(xh, c);

    // h(alpha) = ||log_0(exp_xh(alpha g)) - ref||, with
    // exp_xh(alpha g) = xh (+) s(alpha) g_unit, s = tanh(sqrt c lambda alpha ||g|| / 2) / sqrt c.
    auto f = [&](double alpha) -> RayDistance {
        const double th = std::tanh(c.sqrt() * lambda * alpha * gn / 2.0);
        const Vector w = (th / c.sqrt()) * g_unit;
        const PoincarePoint z = geometry::mobius_add(xh, geometry::project_into_ball(w, c), c);
        const Vector diff = geometry::log_origin(z, c) - ref;
        const double value = diff.norm();
        const double ds = (lambda * gn / 2.0) * (1.0 - th * th);
        const Vector dz = ds * geometry::mobius_add_jvp_right(xh.coords(), w, c, g_unit);
        const Vector dlog = geometry::log_origin_jvp(z.coords(), c, dz);
        const double slope = value > 0.0 ? diff.dot(dlog) / value : dlog.norm();
        return {value, slope};
    };

    // Linearization at alpha = 0: d/dalpha log_0(exp_xh(alpha g)) = Dlog_0(xh)[g].
    const double rate = geometry::log_origin_jvp(xh.coords(), c, g).norm();
    const double guess = eps_img / rate;
    double hi = 2.0 * guess;
    for (int i = 0; i < 200 && f(hi).value < eps_img; ++i) hi *= 2.0;
    return newton_then_bisect(f, guess, hi, eps_img, newton);
}

PullbackResult fgm_pullback(const MlrParams& model, const Vector& x_img, int label, ObjectiveKind objective,
                            double eps_img, const NewtonOptions& newton) {
    const Curvature c = model.curvature;
    PullbackResult out;
    const PoincarePoint xh = geometry::exp_origin(x_img, c);
    const model::InputGradient ig = model::grad_input(objective, model, xh, label);
    if (ig.grad.vec.norm() < kZeroGradient) {
        out.adversarial_img = x_img;
        out.adversarial_ball = xh;
        out.zero_gradient = true;
        return out;
    }
    const RootResult root = calibrate_pullback_step(x_img, ig.grad.vec, eps_img, c, newton);
    out.alpha = root.alpha;
    out.newton_converged = root.converged;
    out.adversarial_ball = geometry::exp_map(xh, root.alpha * ig.grad.vec, c);
    out.adversarial_img = geometry::log_origin(out.adversarial_ball, c);
    out.achieved_img_distance = (out.adversarial_img - geometry::log_origin(xh, c)).norm();
    return out;
}

// ---------------------------------------------------------------------------

std::vector<AttackResult> attack_all(const AttackSpec& spec_in, const MlrParams& model,
                                     const sampling::LabeledDataset& data) {
    AttackSpec spec = spec_in;
    spec.validate();
    const std::size_t n = data.size();
    std::vector<AttackResult> results(n);
    std::vector<std::string> errors(n);
    parallel::parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                results[i] = attack(model, data.points[i], data.labels[i], spec);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            throw NumericError("attack " + std::string(family_name(spec.family)) + " failed on sample " +
                               std::to_string(i) + ": " + errors[i]);
        }
    }
    return results;
}

std::vector<PredictionRecord> run_attack(const AttackSpec& spec, const MlrParams& model,
                                         const sampling::LabeledDataset& data,
                                         const std::vector<int>* clean_predictions) {
    if (data.empty()) throw DataError("run_attack: empty dataset");
    std::vector<int> clean_local;
    if (!clean_predictions) {
        clean_local = model::predict_batch(model, data.points);
        clean_predictions = &clean_local;
    }
    if (clean_predictions->size() != data.size()) throw DataError("run_attack: clean predictions misaligned");

    const std::vector<AttackResult> results = attack_all(spec, model, data);
    std::vector<PoincarePoint> adversarial;
    adversarial.reserve(results.size());
    for (const auto& r : results) adversarial.push_back(r.adversarial);
    const std::vector<int> adv_pred = model::predict_batch(model, adversarial);

    std::vector<PredictionRecord> records(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        PredictionRecord& rec = records[i];
        rec.sample_id = i;
        rec.true_label = data.labels[i];
        rec.clean_pred = (*clean_predictions)[i];
        rec.adv_pred = adv_pred[i];
        rec.family = spec.family;
        rec.objective = spec.objective;
        rec.epsilon = spec.epsilon;
        rec.achieved_distance = results[i].achieved_distance;
        rec.zero_gradient = results[i].zero_gradient;
        rec.clean_incorrect = rec.clean_pred != rec.true_label;
    }
    return records;
}

}  // namespace hypatk::attacks
