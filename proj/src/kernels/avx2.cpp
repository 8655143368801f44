// AVX2 variants. Compiled with -mavx2 only; called after a runtime CPU check.
// Four samples per vector; every expression mirrors lane:: in kernels_impl.hpp.

#include "kernels_impl.hpp"

#include <immintrin.h>

#include <cmath>

namespace hypatk::kernels::avx2 {

namespace {
constexpr std::size_t kLanes = 4;
}

void mlr_logits(const MlrPlanes& planes, const PointsSoA& x, double* out) {
    const MlrKernelSetup setup(planes);
    const std::size_t n = x.count;
    const std::size_t body = n - n % kLanes;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c = _mm256_set1_pd(setup.c);
    const __m256d two_c = _mm256_set1_pd(setup.two_c);
    const __m256d two_sqrt_c = _mm256_set1_pd(setup.two_sqrt_c);

    for (std::size_t k = 0; k < planes.classes; ++k) {
        const auto& kc = setup.classes[k];
        double* row = out + k * n;
        const __m256d beta = _mm256_set1_pd(kc.beta);
        const __m256d c2_p_sq = _mm256_set1_pd(kc.c2_p_sq);
        const __m256d a_norm = _mm256_set1_pd(kc.a_norm);

        for (std::size_t i = 0; i < body; i += kLanes) {
            __m256d uv = _mm256_setzero_pd();
            __m256d v2 = _mm256_setzero_pd();
            for (std::size_t d = 0; d < x.dim; ++d) {
                const __m256d xv = _mm256_loadu_pd(x.coord(d) + i);
                uv = _mm256_add_pd(uv, _mm256_mul_pd(_mm256_set1_pd(kc.neg_p[d]), xv));
                v2 = _mm256_add_pd(v2, _mm256_mul_pd(xv, xv));
            }
            const __m256d t = _mm256_add_pd(one, _mm256_mul_pd(two_c, uv));
            const __m256d alpha = _mm256_add_pd(t, _mm256_mul_pd(c, v2));
            const __m256d den = _mm256_add_pd(t, _mm256_mul_pd(c2_p_sq, v2));
            __m256d s = _mm256_setzero_pd();
            __m256d q = _mm256_setzero_pd();
            for (std::size_t d = 0; d < x.dim; ++d) {
                const __m256d xv = _mm256_loadu_pd(x.coord(d) + i);
                const __m256d num = _mm256_add_pd(_mm256_mul_pd(alpha, _mm256_set1_pd(kc.neg_p[d])),
                                                  _mm256_mul_pd(beta, xv));
                const __m256d z = _mm256_div_pd(num, den);
                s = _mm256_add_pd(s, _mm256_mul_pd(z, _mm256_set1_pd(kc.a[d])));
                q = _mm256_add_pd(q, _mm256_mul_pd(z, z));
            }
            const __m256d kappa = _mm256_sub_pd(one, _mm256_mul_pd(c, q));
            const __m256d arg = _mm256_div_pd(_mm256_mul_pd(two_sqrt_c, s), _mm256_mul_pd(kappa, a_norm));
            _mm256_storeu_pd(row + i, arg);
        }
        for (std::size_t i = body; i < n; ++i) {
            row[i] = lane::mlr_arg(kc, x, i, setup.c, setup.two_c, setup.two_sqrt_c);
        }
        for (std::size_t i = 0; i < n; ++i) row[i] = kc.scale * std::asinh(row[i]);
    }
}

void distances(const PointsSoA& x, const PointsSoA& y, double c_in, double* out) {
    check_shapes(x, y, "distances");
    const std::size_t n = x.count;
    const std::size_t body = n - n % kLanes;
    const double sqrt_c_s = std::sqrt(c_in);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c = _mm256_set1_pd(c_in);
    const __m256d two_c = _mm256_set1_pd(2.0 * c_in);
    const __m256d c2 = _mm256_set1_pd(c_in * c_in);
    const __m256d sqrt_c = _mm256_set1_pd(sqrt_c_s);
    const __m256d limit = _mm256_set1_pd(kAtanhLimit);

    for (std::size_t i = 0; i < body; i += kLanes) {
        __m256d uv = _mm256_setzero_pd();
        __m256d u2 = _mm256_setzero_pd();
        __m256d v2 = _mm256_setzero_pd();
        for (std::size_t d = 0; d < x.dim; ++d) {
            const __m256d xv = _mm256_loadu_pd(x.coord(d) + i);
            const __m256d yv = _mm256_loadu_pd(y.coord(d) + i);
            uv = _mm256_sub_pd(uv, _mm256_mul_pd(xv, yv));
            u2 = _mm256_add_pd(u2, _mm256_mul_pd(xv, xv));
            v2 = _mm256_add_pd(v2, _mm256_mul_pd(yv, yv));
        }
        const __m256d t = _mm256_add_pd(one, _mm256_mul_pd(two_c, uv));
        const __m256d alpha = _mm256_add_pd(t, _mm256_mul_pd(c, v2));
        const __m256d beta = _mm256_sub_pd(one, _mm256_mul_pd(c, u2));
        const __m256d den = _mm256_add_pd(t, _mm256_mul_pd(_mm256_mul_pd(c2, u2), v2));
        __m256d zn2 = _mm256_setzero_pd();
        for (std::size_t d = 0; d < x.dim; ++d) {
            const __m256d xv = _mm256_loadu_pd(x.coord(d) + i);
            const __m256d yv = _mm256_loadu_pd(y.coord(d) + i);
            const __m256d z =
                _mm256_div_pd(_mm256_sub_pd(_mm256_mul_pd(beta, yv), _mm256_mul_pd(alpha, xv)), den);
            zn2 = _mm256_add_pd(zn2, _mm256_mul_pd(z, z));
        }
        const __m256d arg = _mm256_min_pd(_mm256_mul_pd(sqrt_c, _mm256_sqrt_pd(zn2)), limit);
        _mm256_storeu_pd(out + i, arg);
    }
    for (std::size_t i = body; i < n; ++i) {
        out[i] = lane::clamp_atanh_arg(lane::distance_arg(x, y, i, c_in, sqrt_c_s));
    }
    const double two_over_sqrt_c = 2.0 / sqrt_c_s;
    for (std::size_t i = 0; i < n; ++i) out[i] = two_over_sqrt_c * std::atanh(out[i]);
}

void mobius_add(const PointsSoA& x, const PointsSoA& y, double c_in, PointsSoA& out) {
    check_shapes(x, y, "mobius_add");
    check_shapes(x, out, "mobius_add");
    const std::size_t n = x.count;
    const std::size_t body = n - n % kLanes;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d c = _mm256_set1_pd(c_in);
    const __m256d two_c = _mm256_set1_pd(2.0 * c_in);
    const __m256d c2 = _mm256_set1_pd(c_in * c_in);

    for (std::size_t i = 0; i < body; i += kLanes) {
        __m256d uv = _mm256_setzero_pd();
        __m256d u2 = _mm256_setzero_pd();
        __m256d v2 = _mm256_setzero_pd();
        for (std::size_t d = 0; d < x.dim; ++d) {
            const __m256d xv = _mm256_loadu_pd(x.coord(d) + i);
            const __m256d yv = _mm256_loadu_pd(y.coord(d) + i);
            uv = _mm256_add_pd(uv, _mm256_mul_pd(xv, yv));
            u2 = _mm256_add_pd(u2, _mm256_mul_pd(xv, xv));
            v2 = _mm256_add_pd(v2, _mm256_mul_pd(yv, yv));
        }
        const __m256d t = _mm256_add_pd(one, _mm256_mul_pd(two_c, uv));
        const __m256d alpha = _mm256_add_pd(t, _mm256_mul_pd(c, v2));
        const __m256d beta = _mm256_sub_pd(one, _mm256_mul_pd(c, u2));
        const __m256d den = _mm256_add_pd(t, _mm256_mul_pd(_mm256_mul_pd(c2, u2), v2));
        for (std::size_t d = 0; d < x.dim; ++d) {
            const __m256d xv = _mm256_loadu_pd(x.coord(d) + i);
            const __m256d yv = _mm256_loadu_pd(y.coord(d) + i);
            const __m256d z =
                _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(alpha, xv), _mm256_mul_pd(beta, yv)), den);
            _mm256_storeu_pd(out.coord(d) + i, z);
        }
    }
    for (std::size_t i = body; i < n; ++i) lane::mobius_add(x, y, i, c_in, out);
}

}  // namespace hypatk::kernels::avx2
