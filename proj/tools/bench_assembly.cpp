// Benchmark of the OpenMP assembly kernels against the serial reference.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fracfem/assembly.hpp"

using namespace fracfem;

namespace {

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

template <class F>
double time_run(F&& f) {
  const double t0 = now();
  f();
  return now() - t0;
}

} // namespace

int main(int argc, char** argv) {
  int n1d = argc > 1 ? std::atoi(argv[1]) : 800;
  double h2d = argc > 2 ? std::atof(argv[2]) : 0.25;
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  {
    const double h = 2.0 / n1d;
    const Mesh1D mesh = build_mesh_1d(-1.0, 1.0, 1.0, h);
    const FractionalParams params(1, 0.4, 1.0);
    DenseMatrix Kp, Ks;
    const double tp = time_run([&] { Kp = assemble_stiffness(mesh, params, {0, true}); });
    const double ts = time_run([&] { Ks = assemble_stiffness_serial(mesh, params); });
    double maxdiff = 0, scale = max_abs(Ks);
    for (size_t i = 0; i < Kp.a.size(); ++i)
      maxdiff = std::max(maxdiff, std::fabs(Kp.a[i] - Ks.a[i]));
    std::printf("1d  N=%d  parallel %.3fs  serial %.3fs  speedup %.2fx  maxdiff %.2e (rel)\n",
                mesh.n_nodes(), tp, ts, ts / tp, maxdiff / scale);
  }
  {
    const TriMesh2D mesh = build_disk_mesh_2d(1.0, 2.0, h2d, 0.0);
    const FractionalParams params(2, 0.5, 1.0);
    DenseMatrix Kp, Ks;
    const double tp = time_run([&] { Kp = assemble_stiffness(mesh, params, {0, true}); });
    const double ts = time_run([&] { Ks = assemble_stiffness_serial(mesh, params); });
    double maxdiff = 0, scale = max_abs(Ks);
    for (size_t i = 0; i < Kp.a.size(); ++i)
      maxdiff = std::max(maxdiff, std::fabs(Kp.a[i] - Ks.a[i]));
    std::printf("2d  tris=%d  parallel %.3fs  serial %.3fs  speedup %.2fx  maxdiff %.2e (rel)\n",
                mesh.n_triangles(), tp, ts, ts / tp, maxdiff / scale);
  }
  return 0;
}
