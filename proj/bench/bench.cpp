#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "amalgam/harness.hpp"

using namespace amalgam;

namespace {

double best_of(int reps, const std::function<void()>& fn)
{
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return best;
}

void row(const std::string& name, const std::function<SampledField(Exec)>& kernel)
{
    SampledField s, p;
    const double ts = best_of(3, [&] { s = kernel(Exec::serial); });
    const double tp = best_of(3, [&] { p = kernel(Exec::parallel); });
    std::printf("%-28s %10.4f %10.4f %8.2fx  %s\n", name.c_str(), ts, tp, ts / tp,
                s.values == p.values ? "identical" : "DIFFERENT");
}

}  // namespace

int main()
{
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "parallel s", "speedup");
    const Grid g1 = make_grid(1, 4.0, 4096);
    const Grid g2 = make_grid(2, 4.0, 128);
    const auto f1 = sample(parse_function_spec("random_smooth:1"), g1);
    const auto f2 = sample(parse_function_spec("random_smooth:1"), g2);
    const auto w1 = make_weight("power:0.3", g1);
    const auto w2 = make_weight("power:0.3", g2);

    row("maximal dim1 N=4096", [&](Exec e) { return maximal_centered(f1, RadiusLadder::dyadic(g1), e); });
    row("maximal dim2 N=128", [&](Exec e) { return maximal_centered(f2, RadiusLadder::dyadic(g2), e); });
    row("hilbert dim1 N=4096", [&](Exec e) { return cz_apply(f1, CzKernel::hilbert, g1.spacing, e); });
    row("riesz1 dim2 N=128", [&](Exec e) { return cz_apply(f2, CzKernel::riesz1, g2.spacing, e); });
    row("riesz potential dim1 N=4096", [&](Exec e) { return riesz_potential(f1, 0.5, e); });
    row("inner ball norm dim1 t=0.5", [&](Exec e) { return inner_ball_norm(f1, w1, 2.0, 0.5, e); });
    row("inner ball norm dim2 t=0.5", [&](Exec e) { return inner_ball_norm(f2, w2, 2.0, 0.5, e); });
    row("weak amalgam dim1 t=0.5", [&](Exec e) {
        const SpaceParams sp{2.0, 2.0, 0.5, w1, w1};
        return SampledField::constant(g1, weak_amalgam_norm(f1, sp, e));
    });
    return 0;
}
