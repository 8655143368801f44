#include "hypatk/model.hpp"

#include "hypatk/error.hpp"
#include "hypatk/parallel.hpp"
#include "hypatk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace hypatk::model {

std::string_view objective_name(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::CE: return "CE";
        case ObjectiveKind::NFL: return "NFL";
        case ObjectiveKind::SL: return "SL";
        case ObjectiveKind::LL: return "LL";
    }
    return "?";
}

std::optional<ObjectiveKind> parse_objective(std::string_view name) {
    for (ObjectiveKind k : kAllObjectives) {
        if (objective_name(k) == name) return k;
    }
    return std::nullopt;
}

void MlrParams::validate() const {
    if (p.empty()) throw ConfigError("MlrParams: no classes");
    if (p.size() != a.size()) throw ConfigError("MlrParams: p and a differ in class count");
    const Eigen::Index n = p.front().dim();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].dim() != n || a[k].size() != n) {
            throw ConfigError("MlrParams: class " + std::to_string(k) + " has inconsistent dimension");
        }
        if (!p[k].coords().allFinite() || !a[k].allFinite()) {
            throw ConfigError("MlrParams: class " + std::to_string(k) + " has non-finite parameters");
        }
        if (!(a[k].norm() > 0.0)) {
            throw ConfigError("MlrParams: class " + std::to_string(k) + " has a zero normal vector");
        }
        if (curvature.value() * p[k].squared_norm() >= 1.0) {
            throw ConfigError("MlrParams: base point of class " + std::to_string(k) + " is outside the ball");
        }
    }
}

kernels::MlrPlanes MlrParams::planes() const {
    kernels::MlrPlanes out;
    out.classes = p.size();
    out.dim = static_cast<std::size_t>(dim());
    out.c = curvature.value();
    out.p.reserve(out.classes * out.dim);
    out.a.reserve(out.classes * out.dim);
    for (std::size_t k = 0; k < out.classes; ++k) {
        out.p.insert(out.p.end(), p[k].coords().begin(), p[k].coords().end());
        out.a.insert(out.a.end(), a[k].begin(), a[k].end());
    }
    out.prepare();
    return out;
}

MlrParams init_params(int num_classes, Eigen::Index dim, Curvature c, std::uint64_t seed) {
    if (num_classes < 1 || dim < 1) throw ConfigError("init_params: need at least one class and dimension");
    rng::CounterRng gen(seed, {static_cast<std::uint64_t>(rng::Stream::ModelInit)});
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&] {
        Vector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(gen);
        return v;
    };
    MlrParams params;
    params.curvature = c;
    for (int k = 0; k < num_classes; ++k) {
        params.p.push_back(geometry::exp_origin(0.01 * draw(), c));
        Vector a = draw();
        while (a.norm() == 0.0) a = draw();
        params.a.push_back(a / a.norm());
    }
    return params;
}

namespace {

struct ClassTape {
    Vector z;
    double s, kappa, a_norm, arg, asinh_arg, scale, lambda_p;
};

struct Tape {
    std::vector<ClassTape> classes;
    Vector logits;
};

Tape forward(const MlrParams& params, const PoincarePoint& x) {
    const Curvature c = params.curvature;
    const double sqrt_c = c.sqrt();
    const int C = params.num_classes();
    if (x.dim() != params.dim()) throw ConfigError("mlr: input dimension does not match the model");
    Tape tape;
    tape.classes.resize(C);
    tape.logits.resize(C);
    for (int k = 0; k < C; ++k) {
        ClassTape& t = tape.classes[k];
        const Vector& a = params.a[k];
        t.z = geometry::mobius_add_raw(-params.p[k].coords(), x.coords(), c);
        t.s = t.z.dot(a);
        t.kappa = 1.0 - c.value() * t.z.squaredNorm();
        t.a_norm = a.norm();
        t.arg = 2.0 * sqrt_c * t.s / (t.kappa * t.a_norm);
        t.asinh_arg = std::asinh(t.arg);
        t.lambda_p = geometry::conformal_factor(params.p[k], c);
        t.scale = t.lambda_p * t.a_norm / sqrt_c;
        tape.logits[k] = t.scale * t.asinh_arg;
    }
    return tape;
}

struct Backward {
    Vector dx;
    std::vector<Vector> dp;
    std::vector<Vector> da;
};

// Pulls dL/dlogits back to x and, if want_params, to every p_k and a_k.
Backward backward(const MlrParams& params, const PoincarePoint& x, const Tape& tape, const Vector& dlogits,
                  bool want_params) {
    const Curvature c = params.curvature;
    const double k_c = c.value();
    const double sqrt_c = c.sqrt();
    const int C = params.num_classes();
    Backward out;
    out.dx = Vector::Zero(x.dim());
    if (want_params) {
        out.dp.assign(C, Vector::Zero(x.dim()));
        out.da.assign(C, Vector::Zero(x.dim()));
    }
    for (int k = 0; k < C; ++k) {
        const double g = dlogits[k];
        if (g == 0.0) continue;
        const ClassTape& t = tape.classes[k];
        const Vector& a = params.a[k];
        const double common = g * t.scale / std::sqrt(1.0 + t.arg * t.arg);
        const Vector dz =
            (common * 2.0 * sqrt_c / t.a_norm) * (a / t.kappa + (2.0 * k_c * t.s / (t.kappa * t.kappa)) * t.z);
        const Vector neg_p = -params.p[k].coords();
        const geometry::MobiusVjp vjp = geometry::mobius_add_vjp(neg_p, x.coords(), c, dz);
        out.dx += vjp.dv;
        if (want_params) {
            const double an = t.a_norm;
            out.da[k] = (g * t.asinh_arg * t.lambda_p / (sqrt_c * an)) * a +
                        (common * 2.0 * sqrt_c / t.kappa) * (t.z / an - (t.s / (an * an * an)) * a);
            // logit scale depends on p through lambda_p: d lambda / dp = c lambda^2 p
            out.dp[k] = (g * t.asinh_arg * an / sqrt_c * t.lambda_p * t.lambda_p * k_c) * params.p[k].coords() -
                        vjp.du;
        }
    }
    return out;
}

void check_label(int label, int classes) {
    if (label < 0 || label >= classes) {
        throw DataError("label " + std::to_string(label) + " out of range for " + std::to_string(classes) +
                        " classes");
    }
}

}  // namespace

Vector mlr_logits(const MlrParams& params, const PoincarePoint& x) { return forward(params, x).logits; }

int argmax(const Vector& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

int predict(const MlrParams& params, const PoincarePoint& x) { return argmax(mlr_logits(params, x)); }

kernels::PointsSoA to_soa(std::span<const PoincarePoint> points) {
    const std::size_t dim = points.empty() ? 0 : static_cast<std::size_t>(points.front().dim());
    kernels::PointsSoA soa(dim, points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (static_cast<std::size_t>(points[i].dim()) != dim) throw DataError("to_soa: mixed point dimensions");
        for (std::size_t d = 0; d < dim; ++d) soa.coord(d)[i] = points[i][d];
    }
    return soa;
}

std::vector<double> logits_batch(const MlrParams& params, const kernels::PointsSoA& points) {
    if (points.count > 0 && points.dim != static_cast<std::size_t>(params.dim())) {
        throw ConfigError("logits_batch: input dimension does not match the model");
    }
    const kernels::MlrPlanes planes = params.planes();
    std::vector<double> out(planes.classes * points.count);
    kernels::active().mlr_logits(planes, points, out.data());
    return out;
}

std::vector<int> predict_batch(const MlrParams& params, const kernels::PointsSoA& points) {
    const std::vector<double> logits = logits_batch(params, points);
    const std::size_t n = points.count;
    const int C = params.num_classes();
    std::vector<int> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        for (int k = 1; k < C; ++k) {
            if (logits[k * n + i] > logits[best * n + i]) best = k;
        }
        out[i] = best;
    }
    return out;
}

std::vector<int> predict_batch(const MlrParams& params, std::span<const PoincarePoint> points) {
    return predict_batch(params, to_soa(points));
}

double objective_value(ObjectiveKind kind, const Vector& logits, int label) {
    return objective_with_grad(kind, logits, label).value;
}

ObjectiveEval objective_with_grad(ObjectiveKind kind, const Vector& logits, int label) {
    const int C = static_cast<int>(logits.size());
    if (C < 1) throw ConfigError("objective: empty logit vector");
    ObjectiveEval out;
    out.dlogits = Vector::Zero(C);
    switch (kind) {
        case ObjectiveKind::CE: {
            check_label(label, C);
            const double m = logits.maxCoeff();
            const Vector e = (logits.array() - m).exp().matrix();
            const double sum = e.sum();
            out.value = m + std::log(sum) - logits[label];
            out.dlogits = e / sum;
            out.dlogits[label] -= 1.0;
            break;
        }
        case ObjectiveKind::NFL: {
            const int m = argmax(logits);
            out.value = -logits[m];
            out.dlogits[m] = -1.0;
            out.tie = (logits.array() == logits[m]).count() > 1;
            break;
        }
        case ObjectiveKind::SL: {
            if (C < 2) throw ConfigError("objective SL needs at least two classes");
            const int m = argmax(logits);
            int second = -1;
            for (int i = 0; i < C; ++i) {
                if (i == m) continue;
                if (second < 0 || logits[i] > logits[second]) second = i;
            }
            out.value = logits[second];
            out.dlogits[second] = 1.0;
            int equal = 0;
            for (int i = 0; i < C; ++i) {
                if (i != m && logits[i] == logits[second]) ++equal;
            }
            out.tie = logits[second] == logits[m] || equal > 1;
            break;
        }
        case ObjectiveKind::LL: {
            int lo = 0;
            for (int i = 1; i < C; ++i) {
                if (logits[i] < logits[lo]) lo = i;
            }
            out.value = logits[lo];
            out.dlogits[lo] = 1.0;
            out.tie = (logits.array() == logits[lo]).count() > 1;
            break;
        }
    }
    return out;
}

InputGradient grad_input(ObjectiveKind kind, const MlrParams& params, const PoincarePoint& x, int label) {
    const Tape tape = forward(params, x);
    const ObjectiveEval obj = objective_with_grad(kind, tape.logits, label);
    InputGradient out;
    out.grad = {x, backward(params, x, tape, obj.dlogits, false).dx};
    out.objective = obj.value;
    out.tie = obj.tie;
    return out;
}

Eigen::MatrixXd logit_jacobian(const MlrParams& params, const PoincarePoint& x) {
    const Tape tape = forward(params, x);
    const int C = params.num_classes();
    Eigen::MatrixXd jac(C, x.dim());
    for (int k = 0; k < C; ++k) {
        Vector e = Vector::Zero(C);
        e[k] = 1.0;
        jac.row(k) = backward(params, x, tape, e, false).dx.transpose();
    }
    return jac;
}

void ParamGradients::scale(double s) {
    for (auto& v : p) v *= s;
    for (auto& v : a) v *= s;
}

ParamGradients grad_params(const MlrParams& params, std::span<const PoincarePoint> points,
                           std::span<const int> labels, std::span<const std::size_t> indices) {
    if (indices.empty()) throw DataError("grad_params: empty batch");
    if (points.size() != labels.size()) throw DataError("grad_params: points and labels differ in length");
    std::vector<std::size_t> order(indices.begin(), indices.end());
    std::sort(order.begin(), order.end());
    for (std::size_t idx : order) {
        if (idx >= points.size()) throw DataError("grad_params: sample index out of range");
    }

    const int C = params.num_classes();
    const Eigen::Index n = params.dim();
    const std::size_t m = order.size();
    // Per-sample slot: [loss, dp_0..dp_{C-1}, da_0..da_{C-1}]
    const std::size_t stride = 1 + 2 * static_cast<std::size_t>(C * n);
    std::vector<double> slots(stride * m);

    parallel::parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const PoincarePoint& x = points[order[j]];
            const int y = labels[order[j]];
            check_label(y, C);
            const Tape tape = forward(params, x);
            const ObjectiveEval obj = objective_with_grad(ObjectiveKind::CE, tape.logits, y);
            const Backward b = backward(params, x, tape, obj.dlogits, true);
            double* slot = slots.data() + j * stride;
            slot[0] = obj.value;
            for (int k = 0; k < C; ++k) {
                for (Eigen::Index d = 0; d < n; ++d) {
                    slot[1 + k * n + d] = b.dp[k][d];
                    slot[1 + (C + k) * n + d] = b.da[k][d];
                }
            }
        }
    });

    std::vector<double> total(stride, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double* slot = slots.data() + j * stride;
        for (std::size_t t = 0; t < stride; ++t) total[t] += slot[t];
    }
    const double inv = 1.0 / static_cast<double>(m);
    ParamGradients out;
    out.loss = total[0] * inv;
    out.p.assign(C, Vector(n));
    out.a.assign(C, Vector(n));
    for (int k = 0; k < C; ++k) {
        for (Eigen::Index d = 0; d < n; ++d) {
            out.p[k][d] = total[1 + k * n + d] * inv;
            out.a[k][d] = total[1 + (C + k) * n + d] * inv;
        }
    }
    return out;
}

MlrParams rsgd_step(const MlrParams& params, const ParamGradients& grads, double lr) {
    const int C = params.num_classes();
    if (static_cast<int>(grads.p.size()) != C || static_cast<int>(grads.a.size()) != C) {
        throw ConfigError("rsgd_step: gradient shapes do not match the parameters");
    }
    const Curvature c = params.curvature;
    MlrParams next;
    next.curvature = c;
    next.p.reserve(C);
    next.a.reserve(C);
    for (int k = 0; k < C; ++k) {
        // Riemannian gradient: inverse metric (1/lambda^2) times the Euclidean one.
        const double inv_metric = std::pow((1.0 - c.value() * params.p[k].squared_norm()) / 2.0, 2);
        next.p.push_back(geometry::exp_map(params.p[k], (-lr * inv_metric) * grads.p[k], c));
        next.a.push_back(params.a[k] - lr * grads.a[k]);
    }
    return next;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("train: learning_rate must be a finite non-negative number");
    }
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
}

Evaluation evaluate(const MlrParams& params, const sampling::LabeledDataset& data) {
    if (data.empty()) throw DataError("evaluate: empty dataset");
    const kernels::PointsSoA soa = to_soa(data.points);
    const std::vector<double> logits = logits_batch(params, soa);
    const std::size_t n = data.size();
    const int C = params.num_classes();
    double ce = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double m = logits[i];
        for (int k = 1; k < C; ++k) {
            if (logits[k * n + i] > logits[best * n + i]) best = k;
            m = std::max(m, logits[k * n + i]);
        }
        double sum = 0.0;
        for (int k = 0; k < C; ++k) sum += std::exp(logits[k * n + i] - m);
        ce += m + std::log(sum) - logits[data.labels[i] * n + i];
        if (best == data.labels[i]) ++correct;
    }
    return {ce / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

TrainResult train(const sampling::LabeledDataset& data, int num_classes, Curvature c, const TrainConfig& config) {
    config.validate();
    if (data.empty()) throw DataError("train: empty dataset");
    for (int y : data.labels) check_label(y, num_classes);

    TrainResult result;
    result.params = init_params(num_classes, data.dim(), c, config.seed);
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng::CounterRng gen(config.seed,
                            {static_cast<std::uint64_t>(rng::Stream::Shuffle), static_cast<std::uint64_t>(epoch)});
        std::shuffle(order.begin(), order.end(), gen);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, n - start);
            const std::span<const std::size_t> batch(order.data() + start, len);
            ParamGradients grads = grad_params(result.params, data.points, data.labels, batch);
            if (config.reduction == LossReduction::Sum) grads.scale(static_cast<double>(len));
            result.params = rsgd_step(result.params, grads, config.learning_rate);
        }
        const Evaluation ev = evaluate(result.params, data);
        result.history.push_back({epoch + 1, ev.mean_ce, ev.accuracy});
    }
    return result;
}

}  // namespace hypatk::model
