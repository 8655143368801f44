#include "kernels_impl.hpp"

#include "hypatk/error.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hypatk::kernels {

void MlrPlanes::prepare() {
    if (p.size() != classes * dim || a.size() != classes * dim) {
        throw ConfigError("MlrPlanes: parameter arrays do not match classes * dim");
    }
    p_sq.assign(classes, 0.0);
    a_norm.assign(classes, 0.0);
    scale.assign(classes, 0.0);
    const double sqrt_c = std::sqrt(c);
    for (std::size_t k = 0; k < classes; ++k) {
        double pp = 0.0;
        double aa = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            pp = pp + p[k * dim + d] * p[k * dim + d];
            aa = aa + a[k * dim + d] * a[k * dim + d];
        }
        p_sq[k] = pp;
        a_norm[k] = std::sqrt(aa);
        scale[k] = 2.0 / (1.0 - c * pp) * a_norm[k] / sqrt_c;
    }
}

MlrKernelSetup::MlrKernelSetup(const MlrPlanes& planes)
    : neg_p(planes.p.size()), c(planes.c), two_c(2.0 * planes.c), two_sqrt_c(2.0 * std::sqrt(planes.c)) {
    if (planes.p_sq.size() != planes.classes) {
        throw ConfigError("MlrPlanes: prepare() has not been called");
    }
    for (std::size_t j = 0; j < planes.p.size(); ++j) neg_p[j] = -planes.p[j];
    classes.reserve(planes.classes);
    for (std::size_t k = 0; k < planes.classes; ++k) {
        classes.push_back({neg_p.data() + k * planes.dim, planes.a.data() + k * planes.dim,
                           1.0 - c * planes.p_sq[k], (c * c) * planes.p_sq[k], planes.a_norm[k],
                           planes.scale[k]});
    }
}

void check_shapes(const PointsSoA& x, const PointsSoA& y, const char* what) {
    if (x.dim != y.dim || x.count != y.count) {
        throw ConfigError(std::string(what) + ": point sets differ in shape");
    }
}

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(HYPATK_BUILD_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    static const Isa chosen = [] {
        if (const char* env = std::getenv("HYPATK_SIMD")) {
            const std::string v(env);
            if (v == "scalar") return Isa::Scalar;
            if (v == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
        }
        return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
    }();
    return chosen;
}

const KernelTable& table(Isa isa) {
    static const KernelTable scalar_table{&scalar::mlr_logits, &scalar::distances, &scalar::mobius_add};
#if defined(HYPATK_BUILD_AVX2)
    static const KernelTable avx2_table{&avx2::mlr_logits, &avx2::distances, &avx2::mobius_add};
#endif
    if (!isa_available(isa)) {
        throw std::runtime_error(std::string("kernel ISA not available: ") + isa_name(isa));
    }
#if defined(HYPATK_BUILD_AVX2)
    if (isa == Isa::Avx2) return avx2_table;
#endif
    return scalar_table;
}

}  // namespace hypatk::kernels
