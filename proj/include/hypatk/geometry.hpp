#pragma once

// Poincare-ball gyrovector calculus.
//
// Points live in the open ball ||x||^2 < 1/c. Every operation that
// constructs a point clamps it radially to ||x|| <= (1 - kBallMargin)/sqrt(c);
// every atanh argument is clamped to kAtanhLimit. Both events are reported
// through the optional Diagnostics out-parameter instead of silently.

#include <Eigen/Core>

#include <cstddef>

namespace hypatk::geometry {

using Vector = Eigen::VectorXd;

inline constexpr double kBallMargin = 1e-5;
inline constexpr double kAtanhLimit = 1.0 - 1e-12;
// Smallest admissible Mobius denominator. Inside the margin-clamped ball the
// denominator is bounded below by (1 - (1 - kBallMargin)^2)^2 ~ 4e-10.
inline constexpr double kDenominatorFloor = 1e-18;

// Curvature parameter c of the ball; the space has constant curvature -c.
class Curvature {
public:
    explicit Curvature(double c);

    double value() const noexcept { return c_; }
    double sqrt() const noexcept { return sqrt_c_; }
    // Largest Euclidean norm a constructed point may have.
    double max_radius() const noexcept { return (1.0 - kBallMargin) / sqrt_c_; }

    friend bool operator==(const Curvature&, const Curvature&) = default;

private:
    double c_;
    double sqrt_c_;
};

class PoincarePoint {
public:
    PoincarePoint() = default;
    // Trusted constructor: the caller guarantees the ball invariant. Use
    // project_into_ball() for untrusted coordinates.
    explicit PoincarePoint(Vector coords) : coords_(std::move(coords)) {}

    static PoincarePoint origin(Eigen::Index dim) { return PoincarePoint(Vector::Zero(dim)); }

    const Vector& coords() const noexcept { return coords_; }
    Eigen::Index dim() const noexcept { return coords_.size(); }
    double operator[](Eigen::Index i) const { return coords_[i]; }
    double norm() const { return coords_.norm(); }
    double squared_norm() const { return coords_.squaredNorm(); }

    // Gyrogroup inverse; the ball is symmetric so this never leaves it.
    PoincarePoint operator-() const { return PoincarePoint(-coords_); }

private:
    Vector coords_;
};

struct TangentVector {
    PoincarePoint base;
    Vector vec;

    // lambda_base * ||vec||
    double riemannian_norm(Curvature c) const;
};

struct Diagnostics {
    bool ball_clamped = false;
    bool atanh_clamped = false;
};

double conformal_factor(const PoincarePoint& x, Curvature c);
double conformal_factor(const Vector& x, Curvature c);

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y, Curvature c,
                         Diagnostics* diag = nullptr);

// gyr[x,y]z evaluated through the Mobius composition -(x+y)+(x+(y+z)).
// Gyrations are linear, so z may be any vector: it is scaled into the ball,
// gyrated, and scaled back.
Vector gyration(const PoincarePoint& x, const PoincarePoint& y, const Vector& z, Curvature c);

double distance(const PoincarePoint& x, const PoincarePoint& y, Curvature c,
                Diagnostics* diag = nullptr);

PoincarePoint exp_map(const TangentVector& v, Curvature c, Diagnostics* diag = nullptr);
PoincarePoint exp_map(const PoincarePoint& base, const Vector& v, Curvature c,
                      Diagnostics* diag = nullptr);

TangentVector log_map(const PoincarePoint& x, const PoincarePoint& y, Curvature c,
                      Diagnostics* diag = nullptr);

// P_{x->y}(v) = (lambda_x / lambda_y) gyr[y, -x] v
Vector parallel_transport(const PoincarePoint& x, const PoincarePoint& y, const Vector& v,
                          Curvature c);

PoincarePoint project_into_ball(const Vector& x, Curvature c, Diagnostics* diag = nullptr);

// Shortest-path projection of y onto the closed geodesic ball of radius eps
// around center.
PoincarePoint project_to_hyperbolic_ball(const PoincarePoint& center, const PoincarePoint& y,
                                         double eps, Curvature c, Diagnostics* diag = nullptr);

// exp_0 and log_0 on raw coordinates (lambda_0 = 2).
PoincarePoint exp_origin(const Vector& v, Curvature c, Diagnostics* diag = nullptr);
Vector log_origin(const PoincarePoint& y, Curvature c, Diagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Raw formulas and differentials. These work on unconstrained vectors and do
// not clamp; callers are responsible for staying inside the ball.

Vector mobius_add_raw(const Vector& u, const Vector& v, Curvature c);

struct MobiusVjp {
    Vector du;
    Vector dv;
};

// Vector-Jacobian product of (u, v) -> u + v (Mobius) with upstream gradient w.
MobiusVjp mobius_add_vjp(const Vector& u, const Vector& v, Curvature c, const Vector& w);

// Directional derivative of v -> u + v (Mobius) along dv.
Vector mobius_add_jvp_right(const Vector& u, const Vector& v, Curvature c, const Vector& dv);

// Directional derivative of y -> log_0(y) along dy.
Vector log_origin_jvp(const Vector& y, Curvature c, const Vector& dy);

void check_same_dim(const Vector& a, const Vector& b, const char* what);

}  // namespace hypatk::geometry
