// Estimate (A^T A)^{-1} for a tall matrix by averaging debiased inverses of
// q independent LESS sketches, and compare with a single sketch.

#include <iostream>

#include "lessketch/lessketch.hpp"

int main() {
  using namespace lessketch;

  const TallMatrix a = heavy_tail_matrix(4096, 16, 7);

  SketchSpec spec;
  spec.kind = SketchKind::Less;
  spec.m = 96;
  spec.profile = exact_leverage_scores(a);

  const auto single = averaged_inverse(a, spec, 1, 42);
  const auto averaged = averaged_inverse(a, spec, 64, 42);

  std::cout << "relative spectral error, one sketch:   " << format_number(single.error) << '\n'
            << "relative spectral error, 64 averaged:  " << format_number(averaged.error) << '\n'
            << "replicas rejected by the clip:         " << format_number(averaged.report.failure_rate)
            << '\n';
}
