#pragma once

#include <string>
#include <vector>

#include "ddreach/modelset.hpp"
#include "ddreach/serialize.hpp"
#include "ddreach/setrep.hpp"

namespace ddreach {

/// {x : h^T x <= c}
struct Halfspace {
  Vector h;
  double c = 0.0;
};

struct Region {
  std::vector<Halfspace> halfspaces;
  bool contains(const Vector& x, double tol = 0.0) const;
};

/// Polyhedral partition with optional true dynamics per region. Regions are
/// closed; a point on a shared boundary is assigned to the first region that
/// contains it, so declare the ">=" side first.
struct PwaSpec {
  std::vector<Region> regions;
  std::vector<Matrix> A;
  std::vector<Matrix> B;

  Index num_modes() const { return static_cast<Index>(regions.size()); }
  // -1 when no region contains x.
  int mode_of(const Vector& x) const;
  void validate() const;
};

/// One branch of the reachable set. The first num_protected generator
/// columns carry the coefficient constraints of the model sets, in blocks
/// of one model copy each; protected_blocks lists the mode of each block.
struct Fragment {
  ConstrainedZonotope set;
  int mode = -1;       // mode whose model produced this fragment
  Index parent = -1;   // fragment index at the previous step
  Index num_protected = 0;
  std::vector<int> protected_blocks;
};

struct ReachStep {
  std::vector<Fragment> fragments;
  Index reductions = 0;
  Index pruned = 0;
  Index max_generators() const;
  Index max_constraints() const;
};

struct ReachResult {
  std::vector<ReachStep> steps;  // steps[0] holds X0
  Index horizon() const { return static_cast<Index>(steps.size()) - 1; }
};

struct ReachOptions {
  // Cap on generators: all of them for zonotopes, the unconstrained ones
  // for constrained zonotopes. Applied after the sum with W.
  Index max_generators = 50;
  Index max_fragments = 256;
};

ReachResult propagate_lti(const MatrixZonotope& model, const Zonotope& X0, const Zonotope& U_prop,
                          const Zonotope& W, Index horizon, const ReachOptions& opt = {});
ReachResult propagate_lti(const ConstrainedMatrixZonotope& model, const Zonotope& X0,
                          const Zonotope& U_prop, const Zonotope& W, Index horizon,
                          const ReachOptions& opt = {});

/// One product step M (z x U) + W with the constraint-free part reduced to
/// max_free columns. The protected columns of z are kept as is.
Fragment cz_step(const Fragment& z, const ConstrainedMatrixZonotope& M, int mode, const Zonotope& U,
                 const Zonotope& W, Index max_free, bool* reduced = nullptr);

struct ModePartition {
  std::vector<DataSet> per_mode;
  std::vector<std::string> warnings;
};

/// Transition (x(t), u(t), x(t+1)) goes to mode_of(x(t)). Recorded noise
/// factors follow their transitions.
ModePartition partition_data_by_mode(const std::vector<Trajectory>& trajs, const PwaSpec& pwa);

/// Fragments are split by every region, empty pieces are pruned and the rest
/// are propagated under their region's model.
ReachResult propagate_pwa(const std::vector<ConstrainedMatrixZonotope>& models, const PwaSpec& pwa,
                          const Zonotope& X0, const Zonotope& U_prop, const Zonotope& W,
                          Index horizon, const ReachOptions& opt = {});

ReachResult model_based_reference(const Matrix& A, const Matrix& B, const Zonotope& X0,
                                  const Zonotope& U_prop, const Zonotope& W, Index horizon,
                                  const ReachOptions& opt = {});
ReachResult model_based_reference(const PwaSpec& pwa, const Zonotope& X0, const Zonotope& U_prop,
                                  const Zonotope& W, Index horizon, const ReachOptions& opt = {});

/// Membership of x in a fragment. beta_by_mode[q], when non-empty, are the
/// model coefficients to try for the protected blocks of mode q.
bool fragment_contains(const Fragment& f, const Vector& x, const std::vector<Vector>& beta_by_mode,
                       double tol);
bool step_contains(const ReachStep& s, const Vector& x, const std::vector<Vector>& beta_by_mode,
                   double tol);

/// max over fragments of the support value; -inf when every fragment is
/// empty.
double step_support(const ReachStep& s, const Vector& dir);

json to_json(const Fragment& f);
json to_json(const ReachStep& s);

}  // namespace ddreach
