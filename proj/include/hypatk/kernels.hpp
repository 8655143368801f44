#pragma once

// Batched data-parallel kernels over structure-of-arrays point sets.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant selected at runtime. Both variants evaluate the same expressions
// in the same order without fused multiply-add, and transcendental
// functions are applied per lane with the C library, so the variants agree
// bit-for-bit. Pipeline results therefore do not depend on the host ISA.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypatk::kernels {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
// Best available ISA, unless HYPATK_SIMD=scalar|avx2 says otherwise.
Isa active_isa();

// Coordinates stored as data[d * count + i].
struct PointsSoA {
    std::size_t dim = 0;
    std::size_t count = 0;
    std::vector<double> data;

    PointsSoA() = default;
    PointsSoA(std::size_t dim_, std::size_t count_) : dim(dim_), count(count_), data(dim_ * count_, 0.0) {}

    double* coord(std::size_t d) { return data.data() + d * count; }
    const double* coord(std::size_t d) const { return data.data() + d * count; }
};

// Hyperplane parameters flattened for the MLR kernel. Row k of p and a
// holds class k; derived per-class constants are filled by prepare().
struct MlrPlanes {
    std::size_t classes = 0;
    std::size_t dim = 0;
    double c = 1.0;
    std::vector<double> p;  // classes * dim
    std::vector<double> a;  // classes * dim

    std::vector<double> p_sq;   // ||p_k||^2
    std::vector<double> a_norm; // ||a_k||
    std::vector<double> scale;  // lambda_{p_k} ||a_k|| / sqrt(c)

    void prepare();
};

struct KernelTable {
    // out[k * x.count + i] = logit_k(x_i)
    void (*mlr_logits)(const MlrPlanes& planes, const PointsSoA& x, double* out);
    // out[i] = d_c(x_i, y_i), atanh argument clamped like geometry::distance
    void (*distances)(const PointsSoA& x, const PointsSoA& y, double c, double* out);
    // out_i = x_i (+) y_i (unclamped)
    void (*mobius_add)(const PointsSoA& x, const PointsSoA& y, double c, PointsSoA& out);
};

// Throws std::runtime_error if isa is not available on this host/build.
const KernelTable& table(Isa isa);
inline const KernelTable& active() { return table(active_isa()); }

}  // namespace hypatk::kernels
