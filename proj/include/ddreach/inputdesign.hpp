#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ddreach/serialize.hpp"
#include "ddreach/setrep.hpp"

namespace ddreach {

/// Regularized information matrix S = delta I + sum s s^T with its inverse
/// kept up to date by rank-one updates.
struct InfoState {
  Matrix S;
  Matrix S_inv;
  double delta = 0.0;
  Index k = 0;
  Index refactorizations = 0;

  Index dim() const { return S.rows(); }
  double trace_inv() const { return S_inv.trace(); }
};

InfoState info_init(Index d, double delta = 1e-3);

/// Sherman-Morrison update of S_inv. Re-inverts S directly when
/// |S S_inv - I|_F drifts above 1e-6.
void info_update(InfoState& state, const Vector& s);

/// Decrease of tr(S^-1) caused by adding s s^T.
double delta_A(const InfoState& state, const Vector& s);
double delta_A(const InfoState& state, const Vector& x, const Vector& u);

/// c + G xi with xi uniform in the box, then pushed onto A xi = b by
/// alternating projection. Throws NumericalError after 1000 failed draws.
Vector sample_input(const ConstrainedZonotope& u_set, std::mt19937_64& rng);

struct DesignConfig {
  Index n_candidates = 100;
  Index refine_iters = 50;
  double refine_step = 1.0;
  std::uint64_t rng_seed = 0;
};

struct DesignChoice {
  Vector u;
  double delta_A = 0.0;
  double best_sampled = 0.0;
};

/// Greedy A-optimal input: best of n_candidates uniform samples from u_set,
/// refined by projected gradient ascent on the fractional objective over the
/// factor box. Never returns less than the best sample.
DesignChoice design_input(const InfoState& state, const Vector& x, const ConstrainedZonotope& u_set,
                          const DesignConfig& cfg, std::mt19937_64& rng);
DesignChoice design_input(const InfoState& state, const Vector& x, const ConstrainedZonotope& u_set,
                          const DesignConfig& cfg);

struct DesignLogEntry {
  Index trajectory = 0;
  Index step = 0;
  Vector u;
  double delta_A = 0.0;
  double trace_inv = 0.0;  // after the update
};

json to_json(const DesignLogEntry& e);
json to_json(const std::vector<DesignLogEntry>& log);

}  // namespace ddreach
