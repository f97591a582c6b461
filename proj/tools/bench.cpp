// Benchmark comparing the OpenMP kernels against the serial reference:
// discrete operators on a large 2D grid and full solver steps.

#include <chrono>
#include <cstdio>
#include <random>

#include "chg/grid.hpp"
#include "chg/solver.hpp"

using namespace chg;
using clock_type = std::chrono::high_resolution_clock;

namespace {

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

template <class F>
double time_loop(int reps, F&& body) {
  body();  // warm up
  const auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) body();
  return ms_since(t0) / reps;
}

}  // namespace

int main() {
  const int n = 1024;
  const double ext[] = {1.0, 1.0};
  const int cells[] = {n, n};
  const GridSpec g = make_grid(2, ext, cells);

  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CellField a = CellField::zeros(g), b = CellField::zeros(g);
  for (auto& v : a.v) v = u(rng);
  for (auto& v : b.v) v = u(rng);
  FaceField F = FaceField::zeros(g);
  for (int axis = 0; axis < 2; ++axis) {
    for (auto& v : F.comp[axis]) v = u(rng);
  }

  std::printf("grid %dx%d (%zu cells)\n", n, n, g.num_cells());
  std::printf("%-22s %12s %12s %8s\n", "kernel", "openmp [ms]", "serial [ms]", "speedup");

  double tp = time_loop(10, [&] { (void)gradient(a); });
  double ts = time_loop(10, [&] { (void)serial::gradient(a); });
  std::printf("%-22s %12.3f %12.3f %8.2f\n", "gradient", tp, ts, ts / tp);

  tp = time_loop(10, [&] { (void)divergence(F); });
  ts = time_loop(10, [&] { (void)serial::divergence(F); });
  std::printf("%-22s %12.3f %12.3f %8.2f\n", "divergence", tp, ts, ts / tp);

  volatile double sink = 0.0;
  tp = time_loop(10, [&] { sink = inner(a, b); });
  ts = time_loop(10, [&] { sink = serial::inner(a, b); });
  std::printf("%-22s %12.3f %12.3f %8.2f\n", "inner(cell)", tp, ts, ts / tp);

  tp = time_loop(10, [&] { sink = integrate(a); });
  ts = time_loop(10, [&] { sink = serial::integrate(a); });
  std::printf("%-22s %12.3f %12.3f %8.2f\n", "integrate", tp, ts, ts / tp);
  (void)sink;

  // one full implicit step on a mid-sized grid
  {
    const int ns = 256;
    const int cs[] = {ns, ns};
    const GridSpec gs = make_grid(2, ext, cs);
    CoefficientSet coeffs;
    StepOptions opt;
    opt.tau = 1e-4;
    Stepper st(gs, coeffs, PotentialSpec::double_well(), opt);
    std::mt19937_64 rng2(7);
    CellField psi0 = CellField::zeros(gs);
    for (auto& v : psi0.v) v = 0.1 * u(rng2);
    SolverState s = st.init_state(psi0, SourceData::none());
    const double tstep = time_loop(5, [&] {
      auto [s1, rec] = st.step(s, SourceData::none());
      s = std::move(s1);
    });
    std::printf("%-22s %12.3f ms/step (grid %dx%d)\n", "implicit step (2D)", tstep, ns, ns);
  }
  return 0;
}
