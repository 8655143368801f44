#include "hypatk/sampling.hpp"

#include "hypatk/error.hpp"
#include "hypatk/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace hypatk::sampling {

using geometry::Vector;

WrappedNormalSpec::WrappedNormalSpec(PoincarePoint mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const Eigen::Index n = mean_.dim();
    if (covariance_.rows() != n || covariance_.cols() != n) {
        throw ConfigError("wrapped normal: covariance must be " + std::to_string(n) + "x" +
                          std::to_string(n));
    }
    if (!covariance_.allFinite()) throw ConfigError("wrapped normal: non-finite covariance");
    const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ConfigError("wrapped normal: covariance is not symmetric");
    }

    // Isotropic fast path: sigma^2 I (including the zero matrix).
    const double diag0 = n > 0 ? covariance_(0, 0) : 0.0;
    if (covariance_ == diag0 * Eigen::MatrixXd::Identity(n, n)) {
        if (diag0 < 0.0) throw ConfigError("wrapped normal: negative variance");
        isotropic_ = true;
        sigma_ = std::sqrt(diag0);
        factor_ = sigma_ * Eigen::MatrixXd::Identity(n, n);
        return;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_);
    if (eig.info() != Eigen::Success) {
        throw ConfigError("wrapped normal: covariance factorization failed");
    }
    Eigen::VectorXd values = eig.eigenvalues();
    const double tol = 1e-12 * scale * static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (values[i] < -tol) {
            throw ConfigError("wrapped normal: covariance is not positive semi-definite (eigenvalue " +
                              std::to_string(values[i]) + ")");
        }
        values[i] = std::sqrt(std::max(0.0, values[i]));
    }
    factor_ = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

Vector draw_tangent(const WrappedNormalSpec& spec, rng::CounterRng& gen) {
    const Eigen::Index n = spec.mean().dim();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(gen);
    if (spec.isotropic_) return spec.sigma_ * z;
    return spec.factor_ * z;
}

PoincarePoint wrap_tangent(const WrappedNormalSpec& spec, const Vector& origin_tangent, Curvature c,
                           geometry::Diagnostics* diag) {
    const PoincarePoint origin = PoincarePoint::origin(spec.mean().dim());
    const Vector moved = geometry::parallel_transport(origin, spec.mean(), origin_tangent, c);
    return geometry::exp_map(spec.mean(), moved, c, diag);
}

std::vector<PoincarePoint> sample_wrapped_normal(const WrappedNormalSpec& spec, std::size_t count,
                                                 std::uint64_t base_key, Curvature c, SampleStats* stats) {
    std::vector<PoincarePoint> out(count);
    std::atomic<std::size_t> clamped{0};
    parallel::parallel_for(count, [&](std::size_t begin, std::size_t end) {
        std::size_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            rng::CounterRng gen(base_key, {static_cast<std::uint64_t>(i)});
            geometry::Diagnostics diag;
            out[i] = wrap_tangent(spec, draw_tangent(spec, gen), c, &diag);
            if (diag.ball_clamped) ++local;
        }
        clamped += local;
    });
    if (stats) stats->clamped += clamped.load();
    return out;
}

std::vector<PoincarePoint> make_class_means(int num_classes, double radius, Curvature c, Eigen::Index dim) {
    if (num_classes < 1) throw ConfigError("make_class_means: need at least one class");
    if (dim < 2) throw ConfigError("make_class_means: dimension must be at least 2");
    if (!(radius > 0.0)) throw ConfigError("make_class_means: radius must be positive");
    // d(0, x) = (2/sqrt c) atanh(sqrt c ||x||)  =>  ||x|| = tanh(sqrt c r / 2) / sqrt c
    const double rho = std::tanh(c.sqrt() * radius / 2.0) / c.sqrt();
    std::vector<PoincarePoint> means;
    means.reserve(num_classes);
    for (int i = 0; i < num_classes; ++i) {
        const double angle = 2.0 * std::numbers::pi * i / num_classes;
        Vector m = Vector::Zero(dim);
        m[0] = rho * std::cos(angle);
        m[1] = rho * std::sin(angle);
        means.push_back(geometry::project_into_ball(m, c));
    }
    return means;
}

const char* split_name(Split s) { return s == Split::Train ? "train" : "test"; }

void DatasetSpec::validate() const {
    if (num_classes < 1) throw ConfigError("dataset: num_classes must be >= 1");
    if (!(radius > 0.0)) throw ConfigError("dataset: radius must be > 0");
    if (!(variance > 0.0)) throw ConfigError("dataset: variance must be > 0");
    if (dim < 2) throw ConfigError("dataset: dim must be >= 2");
    Curvature{curvature};
}

namespace {

LabeledDataset draw_split(const DatasetSpec& spec, Split split, std::size_t per_class,
                          const std::vector<PoincarePoint>& means, std::size_t& clamped) {
    const Curvature c(spec.curvature);
    const auto stream = split == Split::Train ? rng::Stream::TrainSplit : rng::Stream::TestSplit;
    LabeledDataset data;
    data.split = split;
    data.points.reserve(per_class * means.size());
    data.labels.reserve(per_class * means.size());
    const Eigen::MatrixXd cov = spec.variance * Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    for (int k = 0; k < static_cast<int>(means.size()); ++k) {
        const WrappedNormalSpec wn(means[k], cov);
        const std::uint64_t key =
            rng::derive_key(spec.seed, {static_cast<std::uint64_t>(stream), static_cast<std::uint64_t>(k)});
        SampleStats stats;
        auto pts = sample_wrapped_normal(wn, per_class, key, c, &stats);
        clamped += stats.clamped;
        for (auto& p : pts) {
            data.points.push_back(std::move(p));
            data.labels.push_back(k);
        }
    }
    return data;
}

}  // namespace

GeneratedData generate_dataset(const DatasetSpec& spec) {
    spec.validate();
    const auto means = make_class_means(spec.num_classes, spec.radius, Curvature(spec.curvature), spec.dim);
    GeneratedData out;
    out.train = draw_split(spec, Split::Train, spec.train_per_class, means, out.clamped);
    out.test = draw_split(spec, Split::Test, spec.test_per_class, means, out.clamped);
    return out;
}

}  // namespace hypatk::sampling
