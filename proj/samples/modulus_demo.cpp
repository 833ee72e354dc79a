// Sample paths of a centered empirical field, their kappa/omega curves and a
// small tail table. Usage: modulus_demo [m] [n]

#include <cstdio>
#include <cstdlib>

#include "skorokhod/bounds.hpp"
#include "skorokhod/modulus.hpp"

using namespace skorokhod;

int main(int argc, char** argv) {
  const std::size_t m = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 101;
  const std::size_t n = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 50;
  const Lattice lat(1, m);
  const auto model = FieldModel::partial_sum(FieldModel::uniform_indicator(1, true), n);
  const ModulusEngine engine(lat, QuasiDistance::power_euclidean(1.0));
  const ClassicalEngine classical(lat);
  const auto hs = default_h_grid(m);

  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto path = sample_path(model, lat, SeedSpec{7, r});
    const auto k = engine.kappa_curve(path.values.data(), hs);
    const auto w = classical.curve(path.values.data(), hs);
    std::printf("path %llu\n  %-8s %-10s %-10s\n", static_cast<unsigned long long>(r), "h", "kappa", "omega");
    for (std::size_t i = 0; i < hs.size(); ++i) std::printf("  %-8.4f %-10.5f %-10.5f\n", hs[i], k[i], w[i]);
  }

  // kappa never exceeds omega; the gap is what jumps cost the classical modulus.
  const auto ks = kappa_samples(model, lat, engine, hs, 500, 11);
  const std::vector<double> us{0.25, 0.5, 1.0};
  std::printf("\nP(kappa(h) > u), 500 replicates\n  %-8s", "h");
  for (double u : us) std::printf(" u=%-7.2f", u);
  std::printf("\n");
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const auto t = tail_from_samples(ks, i, us);
    std::printf("  %-8.4f", hs[i]);
    for (double p : t.prob) std::printf(" %-9.4f", p);
    std::printf("\n");
  }

  std::printf("\ntheorem 3.1 bound at u=10 (C_N=C_lambda=1, gamma=1/2, p=2): %.6f\n",
              theorem31_bound(1, 1, 0.5, 2, 10));
  return 0;
}
