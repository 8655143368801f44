// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include "hypatk/analysis.hpp"
#include "hypatk/attacks.hpp"
#include "hypatk/geometry.hpp"
#include "hypatk/io.hpp"
#include "hypatk/model.hpp"
#include "hypatk/pipeline.hpp"
#include "hypatk/sampling.hpp"

#include "oracle/oracle.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hypatk;
using geometry::Curvature;
using geometry::PoincarePoint;
using geometry::Vector;
using model::ObjectiveKind;
using oracle::mp;

namespace tol {
constexpr double kAccuracyTarget = 0.867;
constexpr double kAccuracyBand = 0.020;
constexpr double kRuntimeLimitSeconds = 600.0;
constexpr double kBudgetRelative = 1e-8;
constexpr double kIterateSlack = 1e-8;
constexpr double kGyroRelative = 1e-10;
constexpr double kExpLogRelative = 1e-9;
constexpr double kMaxRiemannianNorm = 5.0;
constexpr double kGeodesicRelative = 1e-9;
constexpr double kTransportRelative = 1e-10;
constexpr double kFlatLimit = 1e-6;
constexpr double kGradientRelative = 1e-5;
constexpr double kTieMargin = 1e-6;
constexpr double kOriginEquivalence = 1e-9;
constexpr double kNewtonVsBisection = 1e-10;
constexpr double kMonotoneSlack = 0.005;
constexpr double kRowSum = 1e-12;
}  // namespace tol

namespace counts {
constexpr std::size_t kBudgetSamples = 10000;
constexpr std::size_t kGeometryCases = 100000;
constexpr std::size_t kGradientInstances = 1000;
constexpr std::size_t kEquivalenceCases = 1000;
constexpr std::size_t kRecordSets = 1000;
}  // namespace counts

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void report(int id, const char* name, const Verdict& v) {
    std::printf("criterion %d %-26s %s %s\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
}

void info(const std::string& line) {
    std::printf("  info: %s\n", line.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct Benchmark {
    sampling::GeneratedData data;
    model::TrainResult trained;
    double clean_accuracy = 0.0;
};

Verdict paper_accuracy(Benchmark& bench) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const sampling::DatasetSpec spec;
    const model::TrainConfig cfg;
    bench.data = sampling::generate_dataset(spec);
    bench.trained = model::train(bench.data.train, spec.num_classes, Curvature(spec.curvature), cfg);
    bench.clean_accuracy = model::evaluate(bench.trained.params, bench.data.test).accuracy;
    const double secs = seconds_since(t0);

    v.detail << "test accuracy " << fmt("%.2f%%", 100.0 * bench.clean_accuracy) << " (target 86.7 +/- 2.0), "
             << fmt("%.1f s", secs);
    v.require(std::abs(bench.clean_accuracy - tol::kAccuracyTarget) <= tol::kAccuracyBand, "accuracy band");
    v.require(secs <= tol::kRuntimeLimitSeconds, "runtime");

    const auto& h = bench.trained.history;
    int non_increasing = 0;
    for (std::size_t i = 1; i < h.size(); ++i) non_increasing += h[i].mean_ce <= h[i - 1].mean_ce;
    info("training loss non-increasing in " + std::to_string(non_increasing) + " of " +
         std::to_string(h.empty() ? 0 : h.size() - 1) + " epoch transitions; " +
         std::to_string(bench.data.clamped) + " boundary clamps");
    return v;
}

Verdict budget_exactness(const Benchmark& bench) {
    Verdict v;
    const auto& params = bench.trained.params;
    const auto& test = bench.data.test;
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> eps_dist(0.05, 2.5);

    std::size_t fgm_checked = 0, pgd_checked = 0;
    double fgm_worst = 0.0, pgd_worst = -1.0;
    for (std::size_t i = 0; fgm_checked < 2 * counts::kBudgetSamples && i < test.size(); ++i) {
        const double eps = eps_dist(rng);
        const ObjectiveKind o = model::kAllObjectives[i % 4];
        for (auto f : {attacks::Family::HyperbolicFgm, attacks::Family::EuclideanFgm}) {
            attacks::AttackSpec s;
            s.family = f;
            s.objective = o;
            s.epsilon = eps;
            const auto r = attacks::attack(params, test.points[i], test.labels[i], s.validate());
            if (r.zero_gradient) continue;
            fgm_worst = std::max(fgm_worst, std::abs(r.achieved_distance / eps - 1.0));
            ++fgm_checked;
        }
    }
    for (std::size_t i = 0; pgd_checked < 2 * counts::kBudgetSamples && i < test.size(); ++i) {
        const double eps = eps_dist(rng);
        const ObjectiveKind o = model::kAllObjectives[i % 4];
        for (auto f : {attacks::Family::HyperbolicPgd, attacks::Family::EuclideanPgd}) {
            attacks::AttackSpec s;
            s.family = f;
            s.objective = o;
            s.epsilon = eps;
            s.steps = 10;
            s.step_rule = i % 2 ? attacks::StepRule::fixed(0.5 * eps) : attacks::StepRule::exact_budget();
            const auto r = attacks::attack(params, test.points[i], test.labels[i], s.validate());
            pgd_worst = std::max(pgd_worst, r.max_iterate_distance - eps);
            ++pgd_checked;
        }
    }
    v.detail << fgm_checked << " FGM results, max |d/eps - 1| = " << fmt("%.2e", fgm_worst) << "; " << pgd_checked
             << " PGD runs, max(d_iterate - eps) = " << fmt("%.2e", pgd_worst);
    v.require(fgm_checked >= counts::kBudgetSamples && pgd_checked >= counts::kBudgetSamples, "sample count");
    v.require(fgm_worst <= tol::kBudgetRelative, "FGM budget");
    v.require(pgd_worst <= tol::kIterateSlack, "PGD iterates");
    return v;
}

Verdict geometry_suite() {
    Verdict v;
    std::mt19937_64 rng(202);
    const double curvatures[] = {0.5, 1.0, 2.0};
    double left_id = 0, left_inv = 0, gyro = 0, explog = 0, logexp = 0, geo = 0, transport = 0, flat = 0;
    for (std::size_t i = 0; i < counts::kGeometryCases; ++i) {
        const Curvature c(curvatures[i % 3]);
        const Eigen::Index dim = 2 + static_cast<Eigen::Index>(i % 4);
        const PoincarePoint x = testsupport::random_point(rng, dim, c);
        const PoincarePoint y = testsupport::random_point(rng, dim, c);
        const PoincarePoint zero = PoincarePoint::origin(dim);

        left_id = std::max(left_id, (geometry::mobius_add(zero, x, c).coords() - x.coords()).norm() /
                                        std::max(x.norm(), 1e-300));
        left_inv = std::max(left_inv, geometry::mobius_add(-x, x, c).norm() / std::max(x.norm(), 1e-300));

        const Vector z = testsupport::gaussian(rng, dim);
        gyro = std::max(gyro, testsupport::rel_err(geometry::gyration(x, y, z, c).norm(), z.norm()));

        const Vector v = testsupport::random_tangent(rng, x, c, tol::kMaxRiemannianNorm);
        const PoincarePoint ex = geometry::exp_map(x, v, c);
        logexp = std::max(logexp, (geometry::log_map(x, ex, c).vec - v).norm() / std::max(v.norm(), 1e-300));
        const PoincarePoint back = geometry::exp_map(x, geometry::log_map(x, y, c).vec, c);
        explog = std::max(explog, (back.coords() - y.coords()).norm() / std::max(y.norm(), 1e-300));

        const double len = geometry::conformal_factor(x, c) * v.norm();
        if (len > 1e-6) geo = std::max(geo, testsupport::rel_err(geometry::distance(x, ex, c), len));

        const Vector w = geometry::parallel_transport(x, y, z, c);
        transport = std::max(transport, testsupport::rel_err(geometry::conformal_factor(y, c) * w.norm(),
                                                             geometry::conformal_factor(x, c) * z.norm()));

        Vector xf = testsupport::gaussian(rng, dim), vf = testsupport::gaussian(rng, dim);
        xf /= std::max(1.0, xf.norm());
        vf /= std::max(1.0, vf.norm());
        const Curvature tiny(1e-8);
        flat = std::max(flat, (geometry::exp_map(PoincarePoint(xf), vf, tiny).coords() - (xf + vf)).norm());
    }
    v.detail << counts::kGeometryCases << " cases; identity " << fmt("%.1e", left_id) << ", inverse "
             << fmt("%.1e", left_inv) << ", gyration " << fmt("%.1e", gyro) << ", log(exp) " << fmt("%.1e", logexp)
             << ", exp(log) " << fmt("%.1e", explog) << ", geodesic " << fmt("%.1e", geo) << ", transport "
             << fmt("%.1e", transport) << ", flat " << fmt("%.1e", flat);
    v.require(left_id <= tol::kGyroRelative && left_inv <= tol::kGyroRelative && gyro <= tol::kGyroRelative,
              "gyro-identities");
    v.require(logexp <= tol::kExpLogRelative && explog <= tol::kExpLogRelative, "exp/log inversion");
    v.require(geo <= tol::kGeodesicRelative, "geodesic length");
    v.require(transport <= tol::kTransportRelative, "transport isometry");
    v.require(flat <= tol::kFlatLimit, "small-curvature limit");
    return v;
}

// Objectives evaluated on 50-digit logits; central differences in this
// precision carry no cancellation error at h = 1e-7.
mp objective_mp(ObjectiveKind kind, const oracle::Vec<mp>& l, int y) {
    std::vector<std::size_t> order(l.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return l[a] > l[b]; });
    switch (kind) {
        case ObjectiveKind::CE: return oracle::cross_entropy<mp>(l, y);
        case ObjectiveKind::NFL: return -l[order.front()];
        case ObjectiveKind::SL: return l[order[1]];
        case ObjectiveKind::LL: return l[order.back()];
    }
    return 0;
}

struct MpParams {
    std::vector<oracle::Vec<mp>> p, a;
};

MpParams lift_params(const model::MlrParams& params) {
    MpParams m;
    for (std::size_t k = 0; k < params.p.size(); ++k) {
        m.p.push_back(oracle::lift<mp>(params.p[k].coords()));
        m.a.push_back(oracle::lift<mp>(params.a[k]));
    }
    return m;
}

template <class F>
Vector central_mp(F&& f, oracle::Vec<mp> at) {
    const mp h("1e-7");
    Vector g(static_cast<Eigen::Index>(at.size()));
    for (std::size_t i = 0; i < at.size(); ++i) {
        const mp keep = at[i];
        at[i] = keep + h;
        const mp up = f(at);
        at[i] = keep - h;
        const mp down = f(at);
        at[i] = keep;
        g[static_cast<Eigen::Index>(i)] = static_cast<double>((up - down) / (2 * h));
    }
    return g;
}

double rel(const Vector& g, const Vector& ref) { return (g - ref).norm() / std::max(ref.norm(), 1e-300); }

double selection_margin(ObjectiveKind kind, const Vector& l) {
    std::vector<double> s(l.data(), l.data() + l.size());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    switch (kind) {
        case ObjectiveKind::CE: return 1.0;
        case ObjectiveKind::NFL: return s[n - 1] - s[n - 2];
        case ObjectiveKind::SL: return std::min(s[n - 1] - s[n - 2], n > 2 ? s[n - 2] - s[n - 3] : 1.0);
        case ObjectiveKind::LL: return s[1] - s[0];
    }
    return 0.0;
}

Verdict gradient_correctness() {
    Verdict v;
    std::mt19937_64 rng(303);
    std::map<ObjectiveKind, std::size_t> checked;
    std::map<ObjectiveKind, double> worst;
    std::size_t ties = 0;
    for (std::size_t i = 0; i < 4 * counts::kGradientInstances + 400; ++i) {
        const ObjectiveKind kind = model::kAllObjectives[i % 4];
        if (checked[kind] >= counts::kGradientInstances) continue;
        const Curvature c(i % 2 ? 1.0 : 0.6);
        const int C = 3 + static_cast<int>(i % 3);
        const auto params = testsupport::random_params(rng, C, 2 + static_cast<Eigen::Index>(i % 3), c);
        const PoincarePoint x = testsupport::random_point(rng, params.dim(), c, 0.85);
        const int y = static_cast<int>(i % static_cast<std::size_t>(C));
        const auto g = model::grad_input(kind, params, x, y);
        if (g.tie || selection_margin(kind, model::mlr_logits(params, x)) < tol::kTieMargin) {
            ++ties;
            continue;
        }
        const MpParams m = lift_params(params);
        const mp cm(c.value());
        const Vector fd = central_mp(
            [&](const oracle::Vec<mp>& xx) { return objective_mp(kind, oracle::mlr_logits<mp>(m.p, m.a, xx, cm), y); },
            oracle::lift<mp>(x.coords()));
        worst[kind] = std::max(worst[kind], rel(g.grad.vec, fd));
        ++checked[kind];
    }

    std::size_t param_checked = 0;
    double param_worst = 0.0;
    for (; param_checked < counts::kGradientInstances; ++param_checked) {
        const Curvature c(param_checked % 2 ? 1.0 : 0.6);
        const int C = 3 + static_cast<int>(param_checked % 2);
        const auto params = testsupport::random_params(rng, C, 2, c);
        std::vector<PoincarePoint> pts;
        std::vector<int> labels;
        for (int j = 0; j < 3; ++j) {
            pts.push_back(testsupport::random_point(rng, 2, c, 0.85));
            labels.push_back(j % C);
        }
        const std::vector<std::size_t> idx{0, 1, 2};
        const auto g = model::grad_params(params, pts, labels, idx);
        const mp cm(c.value());
        for (int k = 0; k < C; ++k) {
            for (int which = 0; which < 2; ++which) {
                auto loss = [&](const oracle::Vec<mp>& theta) {
                    MpParams m = lift_params(params);
                    (which == 0 ? m.p : m.a)[k] = theta;
                    mp s = 0;
                    for (std::size_t j = 0; j < pts.size(); ++j) {
                        s += oracle::cross_entropy<mp>(
                            oracle::mlr_logits<mp>(m.p, m.a, oracle::lift<mp>(pts[j].coords()), cm), labels[j]);
                    }
                    return s / mp(pts.size());
                };
                const Vector at = which == 0 ? params.p[k].coords() : params.a[k];
                const Vector fd = central_mp(loss, oracle::lift<mp>(at));
                param_worst = std::max(param_worst, rel(which == 0 ? g.p[k] : g.a[k], fd));
            }
        }
    }

    for (ObjectiveKind k : model::kAllObjectives) {
        v.detail << model::objective_name(k) << " " << checked[k] << " @ " << fmt("%.1e", worst[k]) << ", ";
        v.require(checked[k] >= counts::kGradientInstances, std::string(model::objective_name(k)) + " count");
        v.require(worst[k] <= tol::kGradientRelative, std::string(model::objective_name(k)) + " input gradient");
    }
    v.detail << "params " << param_checked << " @ " << fmt("%.1e", param_worst) << " (" << ties << " near-ties skipped)";
    v.require(param_worst <= tol::kGradientRelative, "parameter gradient");
    return v;
}

Verdict attack_equivalence() {
    Verdict v;
    std::mt19937_64 rng(404);
    double origin = 0.0, newton = 0.0, pgd_fgm = 0.0;
    for (std::size_t i = 0; i < counts::kEquivalenceCases; ++i) {
        const Curvature c(i % 2 ? 1.0 : 2.0);
        const auto params = testsupport::random_params(rng, 4, 2 + static_cast<Eigen::Index>(i % 3), c);
        const ObjectiveKind o = model::kAllObjectives[i % 4];
        const double eps = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
        attacks::AttackSpec h, e;
        h.family = attacks::Family::HyperbolicFgm;
        e.family = attacks::Family::EuclideanFgm;
        h.objective = e.objective = o;
        h.epsilon = e.epsilon = eps;
        h.validate();
        e.validate();
        const PoincarePoint zero = PoincarePoint::origin(params.dim());
        origin = std::max(origin, (attacks::attack(params, zero, 0, h).adversarial.coords() -
                                   attacks::attack(params, zero, 0, e).adversarial.coords())
                                      .norm());

        const PoincarePoint x = testsupport::random_point(rng, params.dim(), c, 0.95);
        const Vector g = testsupport::gaussian(rng, params.dim());
        const auto root = attacks::solve_ray_budget(x, g, eps, c, {});
        const auto xm = oracle::lift<mp>(x.coords());
        const auto gm = oracle::lift<mp>(g);
        const double ref = oracle::bisect(
            [&](double a) {
                return static_cast<double>(
                    oracle::distance<mp>(xm, oracle::add(xm, oracle::scale(gm, mp(a))), mp(c.value())) - mp(eps));
            },
            0.0, attacks::ray_ball_limit(x.coords(), g, c));
        newton = std::max(newton, std::abs(root.alpha - ref) / ref);

        for (auto [fgm, pgd] : {std::pair{attacks::Family::HyperbolicFgm, attacks::Family::HyperbolicPgd},
                                std::pair{attacks::Family::EuclideanFgm, attacks::Family::EuclideanPgd}}) {
            attacks::AttackSpec a, b;
            a.family = fgm;
            b.family = pgd;
            a.objective = b.objective = o;
            a.epsilon = b.epsilon = eps;
            b.steps = 1;
            a.validate();
            b.validate();
            pgd_fgm = std::max(pgd_fgm, (attacks::attack(params, x, 1, a).adversarial.coords() -
                                         attacks::attack(params, x, 1, b).adversarial.coords())
                                            .norm());
        }
    }
    v.detail << counts::kEquivalenceCases << " cases; origin " << fmt("%.1e", origin) << ", Newton vs bisection "
             << fmt("%.1e", newton) << ", PGD(T=1) vs FGM " << fmt("%.1e", pgd_fgm);
    v.require(origin <= tol::kOriginEquivalence, "origin equivalence");
    v.require(newton <= tol::kNewtonVsBisection, "Newton root");
    v.require(pgd_fgm == 0.0, "PGD(T=1) = FGM");
    return v;
}

Verdict accuracy_curves(const Benchmark& bench) {
    Verdict v;
    const auto& params = bench.trained.params;
    analysis::SweepGrid grid;
    grid.families = {attacks::Family::EuclideanFgm, attacks::Family::HyperbolicFgm, attacks::Family::EuclideanPgd,
                     attacks::Family::HyperbolicPgd};
    grid.objectives.assign(std::begin(model::kAllObjectives), std::end(model::kAllObjectives));
    for (int i = 1; i <= 8; ++i) grid.epsilons.push_back(0.25 * i);
    const auto sweep = analysis::epsilon_sweep(params, bench.data.test, grid);

    std::map<std::pair<attacks::Family, ObjectiveKind>, std::vector<double>> curves;
    for (const auto& row : sweep.rows) curves[{row.family, row.objective}].push_back(row.accuracy);

    std::size_t curves_checked = 0;
    for (auto f : {attacks::Family::EuclideanFgm, attacks::Family::HyperbolicFgm}) {
        for (auto o : {ObjectiveKind::CE, ObjectiveKind::NFL}) {
            const auto& acc = curves[{f, o}];
            const std::string name = std::string(attacks::family_name(f)) + "/" + std::string(model::objective_name(o));
            for (std::size_t i = 1; i < acc.size(); ++i) {
                v.require(acc[i] <= acc[i - 1] + tol::kMonotoneSlack, name + " monotone at step " + std::to_string(i));
            }
            v.require(acc[3] < bench.clean_accuracy, name + " below clean at eps 1");
            ++curves_checked;
        }
    }
    v.detail << curves_checked << " curves monotone within 0.5 points, all below clean "
             << fmt("%.4f", bench.clean_accuracy) << " at eps = 1";

    for (const auto& [key, acc] : curves) {
        std::ostringstream line;
        line << attacks::family_name(key.first) << "/" << model::objective_name(key.second) << ":";
        for (double a : acc) line << " " << fmt("%.4f", a);
        info(line.str());
    }
    for (auto o : model::kAllObjectives) {
        const auto& e = curves[{attacks::Family::EuclideanFgm, o}];
        const auto& h = curves[{attacks::Family::HyperbolicFgm, o}];
        int h_lower = 0;
        for (std::size_t i = 0; i < e.size(); ++i) h_lower += h[i] < e[i];
        info(std::string("ordering ") + std::string(model::objective_name(o)) + ": hyperbolic FGM below euclidean FGM at " +
             std::to_string(h_lower) + " of " + std::to_string(e.size()) + " budgets");
    }
    for (auto [fgm, pgd] : {std::pair{attacks::Family::HyperbolicFgm, attacks::Family::HyperbolicPgd},
                            std::pair{attacks::Family::EuclideanFgm, attacks::Family::EuclideanPgd}}) {
        double gap = 0.0;
        for (auto o : model::kAllObjectives) {
            const auto& a = curves[{fgm, o}];
            const auto& b = curves[{pgd, o}];
            for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
        }
        info(std::string("max |") + std::string(attacks::family_name(pgd)) + " - " + std::string(attacks::family_name(fgm)) +
             "| accuracy gap " + fmt("%.2f points", 100.0 * gap) + " (alpha = 0.5 eps, T = 10)");
    }
    return v;
}

std::vector<attacks::PredictionRecord> random_records(std::mt19937_64& rng, std::size_t n, int C) {
    std::uniform_int_distribution<int> cls(0, C - 1);
    std::bernoulli_distribution wrong(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    std::vector<attacks::PredictionRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].sample_id = i;
        out[i].true_label = cls(rng);
        out[i].adv_pred = wrong(rng) ? cls(rng) : out[i].true_label;
    }
    return out;
}

Verdict analysis_invariants() {
    Verdict v;
    std::mt19937_64 rng(505);
    std::size_t mismatches = 0, bad_rows = 0, nonzero_comparative = 0, zero_rows = 0;
    for (std::size_t t = 0; t < counts::kRecordSets; ++t) {
        const int C = 2 + static_cast<int>(t % 7);
        const auto recs = random_records(rng, 1 + rng() % 300, C);
        std::vector<std::pair<int, int>> pairs;
        for (const auto& r : recs) pairs.emplace_back(r.true_label, r.adv_pred);
        const auto counts = oracle::count_errors(pairs);
        const auto m = analysis::misclass_matrix(recs, C);
        for (int i = 0; i < C; ++i) {
            int total = 0;
            for (int j = 0; j < C; ++j) total += counts.count({i, j}) ? counts.at({i, j}) : 0;
            mismatches += m.row_counts[i] != static_cast<std::size_t>(total);
            const double sum = m.values.row(i).sum();
            if (total == 0) {
                ++zero_rows;
                bad_rows += m.values.row(i).cwiseAbs().maxCoeff() != 0.0;
                continue;
            }
            bad_rows += std::abs(sum - 1.0) > tol::kRowSum || m.values(i, i) != 0.0 || m.values.row(i).minCoeff() < 0.0;
            for (int j = 0; j < C; ++j) {
                const double expected = counts.count({i, j}) ? double(counts.at({i, j})) / total : 0.0;
                mismatches += m.values(i, j) != expected;
            }
        }
        std::vector<analysis::MisclassMatrix> group{m};
        for (int k = 0; k < static_cast<int>(t % 3); ++k) group.push_back(analysis::misclass_matrix(random_records(rng, 200, C), C));
        nonzero_comparative += analysis::comparative_matrix(group, group).cwiseAbs().maxCoeff() != 0.0;
    }
    v.detail << counts::kRecordSets << " record sets; " << mismatches << " count mismatches, " << bad_rows
             << " invalid rows (" << zero_rows << " zero rows seen), " << nonzero_comparative
             << " nonzero self-comparisons";
    v.require(mismatches == 0, "brute-force counts");
    v.require(bad_rows == 0, "row invariants");
    v.require(nonzero_comparative == 0, "identical groups");
    return v;
}

int run_cli(const std::string& env, const std::string& cmd, const fs::path& cfg, const fs::path& out) {
    const std::string line = env + " " + HYPATK_CLI_PATH + " " + cmd + " --config " + cfg.string() + " --output-dir " +
                             out.string() + " > " + (out.parent_path() / (out.filename().string() + ".log")).string() +
                             " 2>&1";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism() {
    Verdict v;
    const fs::path root = fs::path(HYPATK_ACCEPTANCE_SCRATCH);
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "config.json";
    // Paper configuration with PGD added to the grid.
    io::write_text(cfg, R"({"sweep": {"attacks": ["euclidean_fgm", "hyperbolic_fgm", "euclidean_pgd", "hyperbolic_pgd"],
                                      "epsilons": [0.5, 1.0, 2.0]}})");
    const std::pair<const char*, const char*> runs[] = {{"run_a", "HYPATK_THREADS=1 HYPATK_SIMD=scalar"},
                                                        {"run_b", "HYPATK_THREADS=0"}};
    for (const auto& [name, env] : runs) {
        for (const char* cmd : {"generate", "train", "sweep", "report"}) {
            const int rc = run_cli(env, cmd, cfg, root / name);
            v.require(rc == 0, std::string(name) + " " + cmd + " exit " + std::to_string(rc));
            if (rc != 0) return v;
        }
    }
    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "run_a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel_path = fs::relative(entry.path(), root / "run_a");
        const fs::path other = root / "run_b" / rel_path;
        ++compared;
        if (!fs::exists(other) || io::read_text(entry.path()) != io::read_text(other)) {
            ++differing;
            v.require(false, rel_path.string());
        }
    }
    v.detail << compared << " artifacts compared across HYPATK_THREADS=1/scalar and HYPATK_THREADS=0/auto; "
             << differing << " differ";
    v.require(compared > 0, "artifacts present");
    return v;
}

}  // namespace

int main() {
    int failures = 0;
    auto gate = [&](int id, const char* name, const Verdict& v) {
        report(id, name, v);
        failures += !v.pass;
    };

    Benchmark bench;
    gate(1, "paper accuracy", paper_accuracy(bench));
    gate(2, "budget exactness", budget_exactness(bench));
    gate(3, "geometry properties", geometry_suite());
    gate(4, "gradient correctness", gradient_correctness());
    gate(5, "attack equivalence", attack_equivalence());
    gate(6, "accuracy curves", accuracy_curves(bench));
    gate(7, "analysis invariants", analysis_invariants());
    gate(8, "determinism", determinism());
    std::printf("%d of 8 criteria failed\n", failures);
    return failures;
}
