#include "kernels_impl.hpp"

#include <cmath>

namespace hypatk::kernels::scalar {

void mlr_logits(const MlrPlanes& planes, const PointsSoA& x, double* out) {
    const MlrKernelSetup setup(planes);
    for (std::size_t k = 0; k < planes.classes; ++k) {
        const auto& kc = setup.classes[k];
        double* row = out + k * x.count;
        for (std::size_t i = 0; i < x.count; ++i) {
            row[i] = kc.scale * std::asinh(lane::mlr_arg(kc, x, i, setup.c, setup.two_c, setup.two_sqrt_c));
        }
    }
}

void distances(const PointsSoA& x, const PointsSoA& y, double c, double* out) {
    check_shapes(x, y, "distances");
    const double sqrt_c = std::sqrt(c);
    const double two_over_sqrt_c = 2.0 / sqrt_c;
    for (std::size_t i = 0; i < x.count; ++i) {
        out[i] = two_over_sqrt_c * std::atanh(lane::clamp_atanh_arg(lane::distance_arg(x, y, i, c, sqrt_c)));
    }
}

void mobius_add(const PointsSoA& x, const PointsSoA& y, double c, PointsSoA& out) {
    check_shapes(x, y, "mobius_add");
    check_shapes(x, out, "mobius_add");
    for (std::size_t i = 0; i < x.count; ++i) lane::mobius_add(x, y, i, c, out);
}

}  // namespace hypatk::kernels::scalar
