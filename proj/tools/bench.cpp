// Benchmark comparing the OpenMP kernels against their serial reference
// implementations, checking agreement while timing both.

#include <chrono>
#include <cmath>
#include <cstdio>

#include <omp.h>

#include "cyclab/labels.hpp"
#include "cyclab/reference.hpp"
#include "cyclab/rng.hpp"
#include "cyclab/surrogate.hpp"

using namespace cyclab;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_ms(F&& f, int reps) {
    const double t0 = now_ms();
    for (int i = 0; i < reps; ++i) f();
    return (now_ms() - t0) / reps;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

}  // namespace

int main() {
    const int T = 8, r = 96, c = 192;
    Rng rng(11);

    std::printf("threads: %d\n\n", omp_get_max_threads());
    std::printf("%-22s %12s %12s %9s %12s\n", "kernel", "parallel ms", "serial ms",
                "speedup", "max |diff|");

    // dilation
    {
        Tensor3 mask(T, r, c);
        for (int k = 0; k < 200; ++k)
            mask.v[rng.uniform_int(static_cast<int>(mask.v.size()))] = 1.0;
        const DilationParams p{1.0, 2};
        Tensor3 par, ser;
        const double tp = time_ms([&] { par = dilate(mask, p); }, 5);
        const double ts = time_ms([&] { ser = ref::dilate(mask, p); }, 5);
        std::printf("%-22s %12.3f %12.3f %8.2fx %12.3e\n", "dilate", tp, ts, ts / tp,
                    max_abs_diff(par, ser));
    }

    // surrogate forward
    {
        const SurrogateModel m = make_surrogate(16, 3);
        Tensor4 x(T, 4, r, c);
        for (auto& v : x.v) v = rng.normal();
        Tensor3 par, ser;
        const double tp = time_ms([&] { par = forward(m, x); }, 3);
        const double ts = time_ms([&] { ser = ref::forward(m, x); }, 3);
        std::printf("%-22s %12.3f %12.3f %8.2fx %12.3e\n", "surrogate forward", tp, ts,
                    ts / tp, max_abs_diff(par, ser));
    }

    // distance weights
    {
        GridGeometry g{r, c, -47.5, 1.0, 0.0, 1.875};
        Tensor3 zstar(T, r, c);
        for (int t = 0; t < T; ++t)
            for (int k = 0; k < 4; ++k)
                zstar(t, rng.uniform_int(r), rng.uniform_int(c)) = 1.0;
        DistanceWeights par, ser;
        const double tp = time_ms([&] { par = distance_weights(zstar, g, 0.1, 0.1); }, 3);
        const double ts = time_ms([&] { ser = ref::distance_weights(zstar, g, 0.1, 0.1); }, 3);
        const double d = std::max(max_abs_diff(par.w_grad, ser.w_grad),
                                  max_abs_diff(par.w_reg, ser.w_reg));
        std::printf("%-22s %12.3f %12.3f %8.2fx %12.3e\n", "distance weights", tp, ts,
                    ts / tp, d);
    }

    return 0;
}
