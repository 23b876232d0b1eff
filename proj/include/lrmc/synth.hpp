#pragma once

#include <cstdint>
#include <optional>

#include "lrmc/types.hpp"

namespace lrmc {

struct SynthConfig {
  int p = 0;
  int r = 0;
  std::uint64_t seed = 0;
  std::optional<std::pair<double, double>> imbalance;  // beta parameters (gamma1, gamma2)

  void validate() const;
};

/// Assembles a row-stochastic rank <= r matrix from Gaussian factor draws:
/// row-normalized Hadamard square of U0 times column-normalized Hadamard
/// square of V0, optionally followed by a column scaling and row
/// renormalization. Exposed so tests can inject factors directly.
TransitionMatrix assemble_lowrank(const Matrix& u0, const Matrix& v0,
                                  const Vector* column_scale = nullptr);

/// Random rank <= r row-stochastic matrix with balanced invariant mass.
TransitionMatrix random_lowrank(const SynthConfig& cfg);

/// Same construction followed by a Beta(gamma1, gamma2) column scaling and
/// row renormalization, producing an imbalanced invariant distribution.
TransitionMatrix random_lowrank_imbalanced(const SynthConfig& cfg);

}  // namespace lrmc
