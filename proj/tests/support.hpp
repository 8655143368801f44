#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include "hypatk/geometry.hpp"
#include "hypatk/model.hpp"

#include <Eigen/Core>

#include <cmath>
#include <random>

namespace testsupport {

using hypatk::geometry::Curvature;
using hypatk::geometry::PoincarePoint;
using hypatk::geometry::Vector;

inline Vector gaussian(std::mt19937_64& rng, Eigen::Index dim) {
    std::normal_distribution<double> n;
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = n(rng);
    return v;
}

// Uniform direction, Euclidean radius uniform in [0, frac / sqrt(c)).
inline PoincarePoint random_point(std::mt19937_64& rng, Eigen::Index dim, Curvature c, double frac = 0.9) {
    std::uniform_real_distribution<double> u(0.0, frac);
    Vector v = gaussian(rng, dim);
    v *= u(rng) / (v.norm() * c.sqrt());
    return PoincarePoint(v);
}

// Tangent vector at x with Riemannian norm uniform in [0, max_riem).
inline Vector random_tangent(std::mt19937_64& rng, const PoincarePoint& x, Curvature c, double max_riem) {
    std::uniform_real_distribution<double> u(0.0, max_riem);
    Vector v = gaussian(rng, x.dim());
    v *= u(rng) / (v.norm() * hypatk::geometry::conformal_factor(x, c));
    return v;
}

inline hypatk::model::MlrParams random_params(std::mt19937_64& rng, int C, Eigen::Index dim, Curvature c) {
    hypatk::model::MlrParams params;
    params.curvature = c;
    for (int k = 0; k < C; ++k) {
        params.p.push_back(random_point(rng, dim, c, 0.6));
        params.a.push_back(gaussian(rng, dim));
    }
    return params;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testsupport
