#include "hypatk/geometry.hpp"

#include "hypatk/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hypatk::geometry {

namespace {

// Norm given to z before evaluating the gyration composition. Far enough
// from 0 to avoid cancellation in -(x+y)+(x+(y+z)), far enough from the
// boundary to keep the denominators healthy.
constexpr double kGyrationProbeRadius = 0.5;

double clamped_atanh(double arg, Diagnostics* diag) {
    if (arg > kAtanhLimit) {
        if (diag) diag->atanh_clamped = true;
        arg = kAtanhLimit;
    }
    return std::atanh(arg);
}

}  // namespace

Curvature::Curvature(double c) : c_(c), sqrt_c_(std::sqrt(c)) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ConfigError("curvature must be a positive finite number, got " + std::to_string(c));
    }
}

double TangentVector::riemannian_norm(Curvature c) const {
    return conformal_factor(base, c) * vec.norm();
}

void check_same_dim(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw ConfigError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
    }
}

double conformal_factor(const Vector& x, Curvature c) {
    return 2.0 / (1.0 - c.value() * x.squaredNorm());
}

double conformal_factor(const PoincarePoint& x, Curvature c) { return conformal_factor(x.coords(), c); }

Vector mobius_add_raw(const Vector& u, const Vector& v, Curvature c) {
    check_same_dim(u, v, "mobius_add");
    const double k = c.value();
    const double uv = u.dot(v);
    const double u2 = u.squaredNorm();
    const double v2 = v.squaredNorm();
    const double den = 1.0 + 2.0 * k * uv + k * k * u2 * v2;
    if (!(den > kDenominatorFloor)) {
        throw BoundaryError("mobius_add: denominator " + std::to_string(den) +
                            " below numeric floor (points at the ball boundary)");
    }
    const double cu = 1.0 + 2.0 * k * uv + k * v2;
    const double cv = 1.0 - k * u2;
    return (cu * u + cv * v) / den;
}

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y, Curvature c,
                         Diagnostics* diag) {
    return project_into_ball(mobius_add_raw(x.coords(), y.coords(), c), c, diag);
}

Vector gyration(const PoincarePoint& x, const PoincarePoint& y, const Vector& z, Curvature c) {
    check_same_dim(x.coords(), z, "gyration");
    const double zn = z.norm();
    if (zn == 0.0) return z;
    const double scale = kGyrationProbeRadius / (c.sqrt() * zn);
    const Vector probe = scale * z;
    const Vector xy = mobius_add_raw(x.coords(), y.coords(), c);
    const Vector inner = mobius_add_raw(x.coords(), mobius_add_raw(y.coords(), probe, c), c);
    return mobius_add_raw(-xy, inner, c) / scale;
}

double distance(const PoincarePoint& x, const PoincarePoint& y, Curvature c, Diagnostics* diag) {
    const double zn = mobius_add_raw(-x.coords(), y.coords(), c).norm();
    return 2.0 / c.sqrt() * clamped_atanh(c.sqrt() * zn, diag);
}

PoincarePoint exp_map(const PoincarePoint& base, const Vector& v, Curvature c, Diagnostics* diag) {
    check_same_dim(base.coords(), v, "exp_map");
    if (!v.allFinite()) throw NumericError("exp_map: non-finite tangent vector");
    const double vn = v.norm();
    if (vn == 0.0) return base;
    const double lambda = conformal_factor(base, c);
    const double t = std::tanh(c.sqrt() * lambda * vn / 2.0);
    // tanh saturates at 1 for long vectors; keep the step itself inside the ball.
    const PoincarePoint step = project_into_ball((t / (c.sqrt() * vn)) * v, c, diag);
    return mobius_add(base, step, c, diag);
}

PoincarePoint exp_map(const TangentVector& v, Curvature c, Diagnostics* diag) {
    return exp_map(v.base, v.vec, c, diag);
}

TangentVector log_map(const PoincarePoint& x, const PoincarePoint& y, Curvature c, Diagnostics* diag) {
    const Vector z = mobius_add_raw(-x.coords(), y.coords(), c);
    const double zn = z.norm();
    if (zn == 0.0) return {x, Vector::Zero(x.dim())};
    const double lambda = conformal_factor(x, c);
    const double coeff = 2.0 / (c.sqrt() * lambda) * clamped_atanh(c.sqrt() * zn, diag) / zn;
    return {x, coeff * z};
}

Vector parallel_transport(const PoincarePoint& x, const PoincarePoint& y, const Vector& v, Curvature c) {
    return conformal_factor(x, c) / conformal_factor(y, c) * gyration(y, -x, v, c);
}

PoincarePoint project_into_ball(const Vector& x, Curvature c, Diagnostics* diag) {
    if (!x.allFinite()) throw NumericError("project_into_ball: non-finite coordinates");
    const double r = x.norm();
    const double rmax = c.max_radius();
    if (r <= rmax) return PoincarePoint(x);
    if (diag) diag->ball_clamped = true;
    Vector out = x * (rmax / r);
    // Rounding can leave the rescaled norm a few ulps above rmax; shrink until
    // it is not, so that a second projection is the identity.
    while (out.norm() > rmax) out *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
    return PoincarePoint(std::move(out));
}

PoincarePoint project_to_hyperbolic_ball(const PoincarePoint& center, const PoincarePoint& y, double eps,
                                         Curvature c, Diagnostics* diag) {
    if (!(eps > 0.0)) throw ConfigError("project_to_hyperbolic_ball: eps must be positive");
    if (distance(center, y, c, diag) <= eps) return y;
    const TangentVector v = log_map(center, y, c, diag);
    const double rn = v.riemannian_norm(c);
    return exp_map(center, (eps / rn) * v.vec, c, diag);
}

PoincarePoint exp_origin(const Vector& v, Curvature c, Diagnostics* diag) {
    return exp_map(PoincarePoint::origin(v.size()), v, c, diag);
}

Vector log_origin(const PoincarePoint& y, Curvature c, Diagnostics* diag) {
    const double yn = y.norm();
    if (yn == 0.0) return Vector::Zero(y.dim());
    return clamped_atanh(c.sqrt() * yn, diag) / (c.sqrt() * yn) * y.coords();
}

MobiusVjp mobius_add_vjp(const Vector& u, const Vector& v, Curvature c, const Vector& w) {
    const double k = c.value();
    const double uv = u.dot(v);
    const double u2 = u.squaredNorm();
    const double v2 = v.squaredNorm();
    const double alpha = 1.0 + 2.0 * k * uv + k * v2;
    const double beta = 1.0 - k * u2;
    const double den = 1.0 + 2.0 * k * uv + k * k * u2 * v2;
    const Vector z = (alpha * u + beta * v) / den;

    const Vector g_num = w / den;
    const double g_den = -w.dot(z) / den;
    const double gu = g_num.dot(u);
    const double gv = g_num.dot(v);

    MobiusVjp out;
    out.du = alpha * g_num + (2.0 * k * gu) * v - (2.0 * k * gv) * u +
             g_den * (2.0 * k * v + 2.0 * k * k * v2 * u);
    out.dv = beta * g_num + (2.0 * k * gu) * (u + v) + g_den * (2.0 * k * u + 2.0 * k * k * u2 * v);
    return out;
}

Vector mobius_add_jvp_right(const Vector& u, const Vector& v, Curvature c, const Vector& dv) {
    const double k = c.value();
    const double uv = u.dot(v);
    const double u2 = u.squaredNorm();
    const double v2 = v.squaredNorm();
    const double alpha = 1.0 + 2.0 * k * uv + k * v2;
    const double beta = 1.0 - k * u2;
    const double den = 1.0 + 2.0 * k * uv + k * k * u2 * v2;
    const Vector z = (alpha * u + beta * v) / den;
    const double d_alpha = 2.0 * k * (u.dot(dv) + v.dot(dv));
    const double d_den = 2.0 * k * u.dot(dv) + 2.0 * k * k * u2 * v.dot(dv);
    const Vector d_num = d_alpha * u + beta * dv;
    return (d_num - d_den * z) / den;
}

Vector log_origin_jvp(const Vector& y, Curvature c, const Vector& dy) {
    const double r = y.norm();
    if (r == 0.0) return dy;
    const double t = c.sqrt() * r;
    const double f = std::atanh(t) / t;
    // (df/dr) / r = c * g(t), g(t) = 1/(t^2(1-t^2)) - atanh(t)/t^3
    double g;
    if (t < 1e-2) {
        const double t2 = t * t;
        g = 2.0 / 3.0 + 0.8 * t2 + (6.0 / 7.0) * t2 * t2;
    } else {
        g = 1.0 / (t * t * (1.0 - t * t)) - std::atanh(t) / (t * t * t);
    }
    return f * dy + (c.value() * g * y.dot(dy)) * y;
}

}  // namespace hypatk::geometry
