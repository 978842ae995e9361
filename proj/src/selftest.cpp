#include <cmath>
#include <functional>
#include <sstream>

#include "ddreach/harness.hpp"

namespace ddreach {

namespace {

Matrix gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

Vector box_point(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

Vector unit(Index n, std::mt19937_64& rng) {
  Vector v = gaussian(n, 1, rng).col(0);
  return v / v.norm();
}

Zonotope random_zonotope(Index n, Index m, std::mt19937_64& rng) {
  return Zonotope(gaussian(n, 1, rng).col(0), gaussian(n, m, rng));
}

Vector member(const Zonotope& z, std::mt19937_64& rng) { return z.c + z.G * box_point(z.num_generators(), rng); }

SelftestCase sherman_morrison(std::mt19937_64& rng) {
  InfoState s = info_init(8, 1e-3);
  double worst_inv = 0.0, worst_trace = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Vector v = gaussian(8, 1, rng).col(0);
    const double before = s.trace_inv();
    const double pred = delta_A(s, v);
    info_update(s, v);
    worst_trace = std::max(worst_trace, std::abs(before - s.trace_inv() - pred) / std::max(1.0, before));
    worst_inv = std::max(worst_inv, (s.S_inv - s.S.inverse()).norm());
  }
  std::ostringstream d;
  d << "inverse error " << worst_inv << ", trace identity error " << worst_trace;
  return {"sherman_morrison", worst_inv <= 1e-8 && worst_trace <= 1e-10, d.str()};
}

SelftestCase row_norm_bounds(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dd(1, 8);
  bool ok = true;
  int failures = 0;
  for (int t = 0; t < 20; ++t) {
    const Index d = dd(rng);
    std::uniform_int_distribution<int> tt(static_cast<int>(d), 80);
    const Matrix phi = gaussian(d, tt(rng), rng);
    const RightInverseResult row = row_norm_right_inverse(phi);
    const bool good = verify_sandwich(phi, row, 1e-6).holds &&
                      row.row_norm_sum <= pinv_right_inverse(phi).row_norm_sum + 1e-7;
    if (!good) ++failures;
    ok = ok && good;
  }
  return {"row_norm_bounds", ok, std::to_string(failures) + " of 20 random regressors failed"};
}

SelftestCase set_operations(std::mt19937_64& rng) {
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const Zonotope a = random_zonotope(3, 4, rng), b = random_zonotope(3, 2, rng);
    const Matrix M = gaussian(2, 3, rng);
    const Vector xa = member(a, rng), xb = member(b, rng);
    if (!contains_point(minkowski_sum(a, b), xa + xb, 1e-7)) ++bad;
    if (!contains_point(linear_map(M, a), M * xa, 1e-7)) ++bad;
    Vector xy(6);
    xy << xa, xb;
    if (!contains_point(cartesian_product(a, b), xy, 1e-7)) ++bad;
  }
  return {"set_operations", bad == 0, std::to_string(bad) + " sampled containment failures"};
}

SelftestCase girard(std::mt19937_64& rng) {
  int bad = 0;
  for (int t = 0; t < 10; ++t) {
    const Zonotope z = random_zonotope(3, 20, rng);
    const Zonotope r = reduce_girard(z, 2.0);
    if (r.num_generators() > 6) ++bad;
    for (int d = 0; d < 64; ++d) {
      const Vector dir = unit(3, rng);
      if (support(r, dir) < support(z, dir) - 1e-9) ++bad;
    }
  }
  return {"girard_dominance", bad == 0, std::to_string(bad) + " violations over 640 directions"};
}

SelftestCase volume_check(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Zonotope z = random_zonotope(2, 6, rng);
    const double exact = polygon_area(project_polygon(z, {0, 1}));
    worst = std::max(worst, std::abs(volume(z) - exact) / exact);
  }
  return {"volume_formula", worst <= 1e-9, "max relative error vs polygon area " + std::to_string(worst)};
}

SelftestCase halfspace_cover(std::mt19937_64& rng) {
  int bad = 0;
  for (int t = 0; t < 20; ++t) {
    const Zonotope z = random_zonotope(2, 4, rng);
    const Vector h = unit(2, rng);
    const double c = h.dot(z.c);
    const MaybeCz lo = halfspace_intersection(z, h, c), hi = halfspace_intersection(z, -h, -c);
    for (int s = 0; s < 20; ++s) {
      const Vector x = member(z, rng);
      const bool in = (lo && contains_point(*lo, x, 1e-7)) || (hi && contains_point(*hi, x, 1e-7));
      if (!in) ++bad;
    }
  }
  return {"halfspace_cover", bad == 0, std::to_string(bad) + " samples outside both halves"};
}

SelftestCase lti_soundness(std::uint64_t seed) {
  json j = default_lti_config();
  j["horizon"] = 3;
  j["seed"] = seed;
  j["checks"]["containment_trajectories"] = 50;
  j["outputs"]["volumes"] = false;
  const ExperimentConfig cfg = config_from_json(j);
  const ExperimentResult r = run_lti_experiment(cfg);
  Index violations = 0;
  for (const auto& [id, c] : r.report["containment"].items()) violations += c["violations"].get<Index>();
  return {"lti_soundness", r.ok && violations == 0,
          std::to_string(violations) + " violations over 50 trajectories, 9 set families, 3 steps"};
}

SelftestCase kernel_consistency(std::uint64_t seed) {
  ExperimentConfig cfg = config_from_json(default_lti_config());
  cfg.seed = seed;
  const CollectedData cd = collect_data(cfg, InputMode::random);
  const DataSet d = DataSet::from_trajectories(cd.trajectories);
  const ModelSetBundle b = build_model_sets(d, cfg.system.W, pinv_right_inverse(d.Phi()).H);
  const Vector beta = noise_coefficients(d.noise_factors);
  Matrix M = b.denoised.C_n;
  for (Index l = 0; l < beta.size(); ++l) M += beta(l) * b.denoised.G[l];
  Matrix AB(cfg.system.n_x(), cfg.system.n_x() + cfg.system.n_u());
  AB << cfg.system.A[0], cfg.system.B[0];
  const double res = (b.cmz.A * beta - b.cmz.b).lpNorm<Eigen::Infinity>();
  const double model_err = (M * b.H - AB).norm();
  std::ostringstream s;
  s << "kernel residual " << res << ", model error " << model_err;
  return {"kernel_consistency", beta.lpNorm<Eigen::Infinity>() <= 1.0 + 1e-9 && res <= 1e-9 && model_err <= 1e-7,
          s.str()};
}

}  // namespace

std::vector<SelftestCase> run_selftest(std::uint64_t seed) {
  std::mt19937_64 rng = make_stream(seed, 0);
  std::vector<std::function<SelftestCase()>> cases = {
      [&] { return sherman_morrison(rng); }, [&] { return row_norm_bounds(rng); },
      [&] { return set_operations(rng); },   [&] { return girard(rng); },
      [&] { return volume_check(rng); },     [&] { return halfspace_cover(rng); },
      [&] { return kernel_consistency(seed); }, [&] { return lti_soundness(seed); }};
  std::vector<SelftestCase> out;
  for (auto& c : cases) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace ddreach
