#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "ddreach/harness.hpp"

namespace ddreach {

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Stream ids. Data streams depend only on the input mode so every
// combination with that mode sees the same data set.
constexpr std::uint64_t kCheckStream = 100;
constexpr std::uint64_t kDirectionStream = 101;

json regressor_stats(const DataSet& d) {
  const Matrix Phi = d.Phi();
  const Matrix gram = Phi * Phi.transpose();
  const double tr = gram.ldlt().solve(Matrix::Identity(d.d(), d.d())).trace();
  return {{"T", d.T()},
          {"d", d.d()},
          {"rank", numerical_rank(Phi)},
          {"trace_inv_gram", tr},
          {"pinv_frob", pseudoinverse(Phi).norm()},
          {"sigma_min", min_singular_value(Phi)}};
}

std::vector<Vector> random_directions(Index n, Index count, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Vector> dirs;
  for (Index i = 0; i < count; ++i) {
    Vector v(n);
    for (Index j = 0; j < n; ++j) v(j) = nd(rng);
    dirs.push_back(v / v.norm());
  }
  return dirs;
}

// x(0) .. x(horizon) of fresh true runs with inputs uniform in U_prop.
std::vector<Trajectory> check_runs(const ExperimentConfig& cfg, std::mt19937_64& rng) {
  std::vector<Trajectory> out;
  for (Index r = 0; r < cfg.check_trajectories; ++r) {
    const Vector x0 = sample_zonotope(cfg.X0, rng);
    Matrix u(cfg.system.n_u(), cfg.horizon);
    for (Index k = 0; k < cfg.horizon; ++k) u.col(k) = sample_zonotope(cfg.U_prop, rng);
    out.push_back(simulate(cfg.system, x0, u, rng));
  }
  return out;
}

json containment_check(const ReachResult& reach, const std::vector<Trajectory>& runs,
                       const std::vector<Vector>& betas, double tol, Index& violations) {
  violations = 0;
  json first = nullptr;
  for (size_t r = 0; r < runs.size(); ++r) {
    for (Index k = 0; k <= reach.horizon(); ++k) {
      if (!step_contains(reach.steps[k], runs[r].X.col(k), betas, tol)) {
        if (violations == 0) first = {{"trajectory", r}, {"step", k}};
        ++violations;
      }
    }
  }
  return {{"trajectories", runs.size()}, {"violations", violations}, {"first_violation", first}};
}

// supports[k][d] for every step k and direction d.
std::vector<std::vector<double>> support_table(const ReachResult& reach,
                                               const std::vector<Vector>& dirs) {
  std::vector<std::vector<double>> out;
  for (const ReachStep& s : reach.steps) {
    std::vector<SupportOracle> oracles;
    for (const Fragment& f : s.fragments) oracles.emplace_back(f.set);
    std::vector<double> row;
    for (const Vector& d : dirs) {
      double best = -std::numeric_limits<double>::infinity();
      for (SupportOracle& o : oracles) {
        if (!o.empty()) best = std::max(best, o(d));
      }
      row.push_back(best);
    }
    out.push_back(std::move(row));
  }
  return out;
}

// Largest a - b over steps and directions; <= tol means a is inside b.
json dominance(const std::vector<std::vector<double>>& inner,
               const std::vector<std::vector<double>>& outer, double tol) {
  double worst = -std::numeric_limits<double>::infinity();
  Index worst_step = -1;
  bool holds = true;
  for (size_t k = 0; k < inner.size(); ++k) {
    for (size_t d = 0; d < inner[k].size(); ++d) {
      const double gap = inner[k][d] - outer[k][d];
      if (gap > worst) {
        worst = gap;
        worst_step = static_cast<Index>(k);
      }
      if (gap > tol) holds = false;
    }
  }
  return {{"holds", holds}, {"max_excess", worst}, {"worst_step", worst_step}};
}

struct ModeData {
  DataSet data;                          // LTI
  std::vector<DataSet> per_mode;         // PWA
  std::vector<Vector> betas;             // true noise coefficients per mode
  json stats;
};

}  // namespace

ExperimentResult run_lti_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != "lti") throw std::invalid_argument("run_lti_experiment: config kind is not lti");
  ExperimentResult res;
  Stopwatch clock;
  json& rep = res.report;
  rep["kind"] = "lti";
  rep["seed"] = cfg.seed;
  rep["config"] = cfg.source;
  rep["system"] = {{"A", matrix_to_json(cfg.system.A[0], false)},
                   {"B", matrix_to_json(cfg.system.B[0], false)}};
  const ReachOptions opt{cfg.max_generators, cfg.max_fragments};
  const Zonotope& W = cfg.system.W;

  std::set<InputMode> modes;
  for (const Combination& c : cfg.combinations) modes.insert(c.input);
  std::map<InputMode, ModeData> data;
  for (InputMode m : modes) {
    const CollectedData cd = collect_data(cfg, m);
    ModeData md;
    md.data = DataSet::from_trajectories(cd.trajectories);
    require_full_row_rank(md.data.Phi());
    md.betas = {noise_coefficients(md.data.noise_factors)};
    md.stats = regressor_stats(md.data);
    if (m == InputMode::designed) md.stats["design_log"] = to_json(cd.design_log);
    rep["data"][to_string(m)] = md.stats;
    data.emplace(m, std::move(md));
  }
  res.timings["data"] = clock.lap();

  std::map<std::pair<InputMode, RightInverseMethod>, ModelSetBundle> bundles;
  auto bundle = [&](InputMode m, RightInverseMethod h) -> const ModelSetBundle& {
    auto key = std::make_pair(m, h);
    auto it = bundles.find(key);
    if (it != bundles.end()) return it->second;
    const Matrix Phi = data.at(m).data.Phi();
    const RightInverseResult ri = compute_right_inverse(Phi, h);
    ModelSetBundle b = build_model_sets(data.at(m).data, W, ri.H);
    json j = to_json(ri);
    if (h == RightInverseMethod::row_norm) {
      const SandwichCheck sw = verify_sandwich(Phi, ri, 1e-6);
      j["sandwich"] = {{"pinv_frob", sw.lhs}, {"row_norm_optimum", sw.gamma}, {"upper", sw.rhs}, {"holds", sw.holds}};
    }
    j["proxy"] = generator_norm_proxy(b.mz);
    j["kernel_rows"] = b.cmz.num_constraints();
    j["generators"] = b.mz.num_generators();
    const Vector& beta = data.at(m).betas[0];
    j["true_coefficients"] = {{"max_abs", beta.lpNorm<Eigen::Infinity>()},
                              {"kernel_residual", (b.cmz.A * beta - b.cmz.b).lpNorm<Eigen::Infinity>()}};
    rep["right_inverses"][to_string(m)][to_string(h)] = j;
    return bundles.emplace(key, std::move(b)).first->second;
  };

  for (const Combination& c : cfg.combinations) {
    const ModelSetBundle& b = bundle(c.input, c.inverse);
    res.reach[c.id()] = c.model == ModelSetType::mz
                            ? propagate_lti(b.mz, cfg.X0, cfg.U_prop, W, cfg.horizon, opt)
                            : propagate_lti(b.cmz, cfg.X0, cfg.U_prop, W, cfg.horizon, opt);
  }
  res.reach["model"] = model_based_reference(cfg.system.A[0], cfg.system.B[0], cfg.X0, cfg.U_prop, W,
                                             cfg.horizon, opt);
  res.timings["propagation"] = clock.lap();

  // Soundness self-check.
  {
    std::mt19937_64 rng = make_stream(cfg.seed, kCheckStream);
    const std::vector<Trajectory> runs = check_runs(cfg, rng);
    for (const auto& [id, reach] : res.reach) {
      std::vector<Vector> betas;
      for (const Combination& c : cfg.combinations)
        if (c.id() == id) betas = data.at(c.input).betas;
      Index v = 0;
      rep["containment"][id] = containment_check(reach, runs, betas, cfg.tolerance, v);
      if (v > 0) res.ok = false;
    }
  }
  res.timings["containment"] = clock.lap();

  // Support comparisons.
  {
    std::mt19937_64 rng = make_stream(cfg.seed, kDirectionStream);
    const std::vector<Vector> dirs = random_directions(cfg.system.n_x(), cfg.support_directions, rng);
    std::map<std::string, std::vector<std::vector<double>>> sup;
    for (const auto& [id, reach] : res.reach) sup[id] = support_table(reach, dirs);
    for (const Combination& c : cfg.combinations) {
      rep["orderings"]["model_inside"][c.id()] = dominance(sup["model"], sup[c.id()], cfg.tolerance);
      if (c.model == ModelSetType::cmz) {
        Combination mz = c;
        mz.model = ModelSetType::mz;
        if (sup.count(mz.id())) {
          rep["orderings"]["cmz_inside_mz"][c.id()] = dominance(sup[c.id()], sup[mz.id()], cfg.tolerance);
        }
      }
    }
    json js;
    for (const auto& [id, table] : sup) js[id] = table;
    rep["supports"] = {{"directions", [&] {
                          json d = json::array();
                          for (const Vector& v : dirs) d.push_back(vector_to_json(v));
                          return d;
                        }()},
                       {"values", js}};
  }
  res.timings["supports"] = clock.lap();

  // Proxy chain V(A, row) <= V(A, pinv) <= V(R, pinv).
  if (modes.count(InputMode::random) && modes.count(InputMode::designed)) {
    const double a_row = generator_norm_proxy(bundle(InputMode::designed, RightInverseMethod::row_norm).mz);
    const double a_pinv = generator_norm_proxy(bundle(InputMode::designed, RightInverseMethod::pinv).mz);
    const double r_pinv = generator_norm_proxy(bundle(InputMode::random, RightInverseMethod::pinv).mz);
    const double tr_a = data.at(InputMode::designed).stats["trace_inv_gram"].get<double>();
    const double tr_r = data.at(InputMode::random).stats["trace_inv_gram"].get<double>();
    const double pf_a = data.at(InputMode::designed).stats["pinv_frob"].get<double>();
    const double pf_r = data.at(InputMode::random).stats["pinv_frob"].get<double>();
    const bool hyp = tr_a <= tr_r;
    rep["proxy_chain"] = {{"designed_row_norm", a_row},
                          {"designed_pinv", a_pinv},
                          {"random_pinv", r_pinv},
                          {"first_holds", a_row <= a_pinv + 1e-7},
                          {"second_holds", a_pinv <= r_pinv + 1e-7},
                          {"trace_hypothesis", hyp},
                          {"pinv_norm_ordering", pf_a <= pf_r * (1.0 + 1e-12)},
                          {"implication_holds", !hyp || pf_a <= pf_r * (1.0 + 1e-12)}};
  }

  // Volumes at the final step, unconstrained sets only.
  if (cfg.volumes) {
    auto final_volume = [&](const std::string& id) {
      const ConstrainedZonotope& z = res.reach.at(id).steps.back().fragments.at(0).set;
      Zonotope zz = z.as_zonotope();
      if (zz.num_generators() > cfg.volume_generators) {
        zz = reduce_girard(zz, static_cast<double>(cfg.volume_generators) / static_cast<double>(zz.dim()));
      }
      return VolumeRow{id, volume(zz), 0.0, zz.num_generators()};
    };
    VolumeRow model = final_volume("model");
    model.ratio = 1.0;
    res.volume_table.push_back(model);
    for (const Combination& c : cfg.combinations) {
      if (c.model != ModelSetType::mz) continue;
      VolumeRow row = final_volume(c.id());
      row.ratio = row.volume / model.volume;
      res.volume_table.push_back(row);
    }
    json vt = json::array();
    for (const VolumeRow& r : res.volume_table) {
      vt.push_back({{"method", r.method}, {"volume", r.volume}, {"ratio", r.ratio}, {"generators", r.generators}});
    }
    rep["volume_table"] = vt;
  }
  res.timings["volumes"] = clock.lap();

  json steps;
  for (const auto& [id, reach] : res.reach) {
    json s = json::array();
    for (const ReachStep& st : reach.steps) {
      s.push_back({{"generators", st.max_generators()}, {"constraints", st.max_constraints()},
                   {"reductions", st.reductions}});
    }
    steps[id] = s;
  }
  rep["set_sizes"] = steps;
  rep["ok"] = res.ok;
  return res;
}

ExperimentResult run_pwa_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != "pwa") throw std::invalid_argument("run_pwa_experiment: config kind is not pwa");
  ExperimentResult res;
  Stopwatch clock;
  json& rep = res.report;
  rep["kind"] = "pwa";
  rep["seed"] = cfg.seed;
  rep["config"] = cfg.source;
  const ReachOptions opt{cfg.max_generators, cfg.max_fragments};
  const Zonotope& W = cfg.system.W;
  const PwaSpec& pwa = cfg.system.pwa;
  const Index Q = pwa.num_modes();

  std::set<InputMode> modes;
  for (const Combination& c : cfg.combinations) modes.insert(c.input);
  std::map<InputMode, ModeData> data;
  for (InputMode m : modes) {
    const CollectedData cd = collect_data(cfg, m);
    ModePartition part = partition_data_by_mode(cd.trajectories, pwa);
    ModeData md;
    md.stats["warnings"] = part.warnings;
    for (Index q = 0; q < Q; ++q) {
      const DataSet& d = part.per_mode[q];
      if (d.T() < d.d()) {
        throw std::invalid_argument("pwa: mode " + std::to_string(q) + " received " + std::to_string(d.T()) +
                                    " transitions, fewer than " + std::to_string(d.d()) +
                                    "; change K, T_i or data_initial_sets");
      }
      require_full_row_rank(d.Phi());
      md.betas.push_back(noise_coefficients(d.noise_factors));
      md.stats["modes"].push_back(regressor_stats(d));
    }
    if (m == InputMode::designed) md.stats["design_log"] = to_json(cd.design_log);
    md.per_mode = std::move(part.per_mode);
    rep["data"][to_string(m)] = md.stats;
    data.emplace(m, std::move(md));
  }
  res.timings["data"] = clock.lap();

  for (const Combination& c : cfg.combinations) {
    std::vector<ConstrainedMatrixZonotope> models;
    json jm = json::array();
    for (Index q = 0; q < Q; ++q) {
      const DataSet& d = data.at(c.input).per_mode[q];
      const RightInverseResult ri = compute_right_inverse(d.Phi(), c.inverse);
      const ModelSetBundle b = build_model_sets(d, W, ri.H);
      json j = to_json(ri);
      j["proxy"] = generator_norm_proxy(b.mz);
      j["kernel_rows"] = b.cmz.num_constraints();
      jm.push_back(j);
      models.push_back(c.model == ModelSetType::cmz ? b.cmz : ConstrainedMatrixZonotope(b.mz));
    }
    rep["right_inverses"][c.id()] = jm;
    res.reach[c.id()] = propagate_pwa(models, pwa, cfg.X0, cfg.U_prop, W, cfg.horizon, opt);
  }
  res.reach["model"] = model_based_reference(pwa, cfg.X0, cfg.U_prop, W, cfg.horizon, opt);
  res.timings["propagation"] = clock.lap();

  {
    std::mt19937_64 rng = make_stream(cfg.seed, kCheckStream);
    const std::vector<Trajectory> runs = check_runs(cfg, rng);
    for (const auto& [id, reach] : res.reach) {
      std::vector<Vector> betas;
      for (const Combination& c : cfg.combinations)
        if (c.id() == id && c.model == ModelSetType::cmz) betas = data.at(c.input).betas;
      Index v = 0;
      rep["containment"][id] = containment_check(reach, runs, betas, cfg.tolerance, v);
      if (v > 0) res.ok = false;
    }
  }
  res.timings["containment"] = clock.lap();

  {
    std::mt19937_64 rng = make_stream(cfg.seed, kDirectionStream);
    const std::vector<Vector> dirs = random_directions(cfg.system.n_x(), cfg.support_directions, rng);
    const auto ref = support_table(res.reach.at("model"), dirs);
    for (const Combination& c : cfg.combinations) {
      rep["orderings"]["model_inside"][c.id()] =
          dominance(ref, support_table(res.reach.at(c.id()), dirs), cfg.tolerance);
    }
  }
  res.timings["supports"] = clock.lap();

  json widths;
  for (const auto& [id, reach] : res.reach) {
    const Index n = cfg.system.n_x();
    Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    for (const Fragment& f : reach.steps.back().fragments) {
      if (is_empty(f.set)) continue;
      const Interval iv = interval_hull(f.set);
      lo = lo.cwiseMin(iv.lower);
      hi = hi.cwiseMax(iv.upper);
    }
    json counts = json::array(), pruned = json::array();
    bool bounded = true;
    for (Index k = 0; k <= reach.horizon(); ++k) {
      const Index nf = static_cast<Index>(reach.steps[k].fragments.size());
      counts.push_back(nf);
      pruned.push_back(reach.steps[k].pruned);
      if (k < 62 && nf > (Index{1} << k)) bounded = false;
    }
    widths[id] = vector_to_json(hi - lo);
    rep["fragments"][id] = {{"per_step", counts}, {"pruned", pruned}, {"within_binary_bound", bounded}};
    rep["hull"][id] = {{"lower", vector_to_json(lo)}, {"upper", vector_to_json(hi)}};
  }
  rep["hull_widths"] = widths;
  res.timings["hulls"] = clock.lap();
  rep["ok"] = res.ok;
  return res;
}

}  // namespace ddreach
