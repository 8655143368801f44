#pragma once

#include "hypatk/kernels.hpp"

#include <cmath>

namespace hypatk::kernels {

namespace scalar {
void mlr_logits(const MlrPlanes& planes, const PointsSoA& x, double* out);
void distances(const PointsSoA& x, const PointsSoA& y, double c, double* out);
void mobius_add(const PointsSoA& x, const PointsSoA& y, double c, PointsSoA& out);
}  // namespace scalar

#if defined(HYPATK_BUILD_AVX2)
namespace avx2 {
void mlr_logits(const MlrPlanes& planes, const PointsSoA& x, double* out);
void distances(const PointsSoA& x, const PointsSoA& y, double c, double* out);
void mobius_add(const PointsSoA& x, const PointsSoA& y, double c, PointsSoA& out);
}  // namespace avx2
#endif

// atanh arguments are clamped to the same limit as geometry::distance.
inline constexpr double kAtanhLimit = 1.0 - 1e-12;

// Per-sample reference formulas. The AVX2 kernels use these for loop tails
// and mirror their operation order lane-wise in the vector bodies.
namespace lane {

struct MlrClassConsts {
    const double* neg_p;
    const double* a;
    double beta;       // 1 - c ||p||^2
    double c2_p_sq;    // c^2 ||p||^2
    double a_norm;
    double scale;
};

inline double mlr_arg(const MlrClassConsts& k, const PointsSoA& x, std::size_t i, double c, double two_c,
                      double two_sqrt_c) {
    double uv = 0.0;
    double v2 = 0.0;
    for (std::size_t d = 0; d < x.dim; ++d) {
        const double xv = x.coord(d)[i];
        uv = uv + k.neg_p[d] * xv;
        v2 = v2 + xv * xv;
    }
    const double t = 1.0 + two_c * uv;
    const double alpha = t + c * v2;
    const double den = t + k.c2_p_sq * v2;
    double s = 0.0;
    double q = 0.0;
    for (std::size_t d = 0; d < x.dim; ++d) {
        const double z = (alpha * k.neg_p[d] + k.beta * x.coord(d)[i]) / den;
        s = s + z * k.a[d];
        q = q + z * z;
    }
    const double kappa = 1.0 - c * q;
    return (two_sqrt_c * s) / (kappa * k.a_norm);
}

// sqrt(c) * ||-x_i (+) y_i||, before clamping
inline double distance_arg(const PointsSoA& x, const PointsSoA& y, std::size_t i, double c, double sqrt_c) {
    const double two_c = 2.0 * c;
    const double c2 = c * c;
    double uv = 0.0;
    double u2 = 0.0;
    double v2 = 0.0;
    for (std::size_t d = 0; d < x.dim; ++d) {
        const double xv = x.coord(d)[i];
        const double yv = y.coord(d)[i];
        uv = uv - xv * yv;
        u2 = u2 + xv * xv;
        v2 = v2 + yv * yv;
    }
    const double t = 1.0 + two_c * uv;
    const double alpha = t + c * v2;
    const double beta = 1.0 - c * u2;
    const double den = t + (c2 * u2) * v2;
    double zn2 = 0.0;
    for (std::size_t d = 0; d < x.dim; ++d) {
        const double z = (beta * y.coord(d)[i] - alpha * x.coord(d)[i]) / den;
        zn2 = zn2 + z * z;
    }
    return sqrt_c * std::sqrt(zn2);
}

inline double clamp_atanh_arg(double arg) { return arg > kAtanhLimit ? kAtanhLimit : arg; }

inline void mobius_add(const PointsSoA& x, const PointsSoA& y, std::size_t i, double c, PointsSoA& out) {
    const double two_c = 2.0 * c;
    const double c2 = c * c;
    double uv = 0.0;
    double u2 = 0.0;
    double v2 = 0.0;
    for (std::size_t d = 0; d < x.dim; ++d) {
        const double xv = x.coord(d)[i];
        const double yv = y.coord(d)[i];
        uv = uv + xv * yv;
        u2 = u2 + xv * xv;
        v2 = v2 + yv * yv;
    }
    const double t = 1.0 + two_c * uv;
    const double alpha = t + c * v2;
    const double beta = 1.0 - c * u2;
    const double den = t + (c2 * u2) * v2;
    for (std::size_t d = 0; d < x.dim; ++d) {
        out.coord(d)[i] = (alpha * x.coord(d)[i] + beta * y.coord(d)[i]) / den;
    }
}

}  // namespace lane

// Shared setup for the MLR kernels.
struct MlrKernelSetup {
    std::vector<double> neg_p;
    std::vector<lane::MlrClassConsts> classes;
    double c, two_c, two_sqrt_c;

    explicit MlrKernelSetup(const MlrPlanes& planes);
};

void check_shapes(const PointsSoA& x, const PointsSoA& y, const char* what);

}  // namespace hypatk::kernels
