// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "../test_util.hpp"
#include "ddreach/harness.hpp"

using namespace ddreach;
using ddreach::testing::random_cz;
using ddreach::testing::random_matrix;
using ddreach::testing::random_unit;
using ddreach::testing::random_vector;
using ddreach::testing::sample_member;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << why;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Shared by criteria 1 and 5.
const ExperimentResult& lti_seed0() {
  static const ExperimentResult r = [] {
    json j = default_lti_config();
    j["seed"] = 0;
    j["checks"]["containment_trajectories"] = 1000;
    j["checks"]["support_directions"] = 32;
    j["outputs"]["volumes"] = false;
    return run_lti_experiment(config_from_json(j));
  }();
  return r;
}

double lti_seconds = 0.0;

Outcome soundness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult& r = lti_seed0();
  lti_seconds = seconds_since(t0);
  Index families = 0, trajs = 0;
  for (const auto& [id, c] : r.report["containment"].items()) {
    ++families;
    trajs = c["trajectories"].get<Index>();
    o.require(c["violations"].get<Index>() == 0, id + " has " + c["violations"].dump() + " violations");
  }
  o.require(families == 9, "expected 9 set families, got " + std::to_string(families));
  o.require(trajs == 1000, "trajectory count " + std::to_string(trajs));
  o.require(lti_seconds < 120.0, "runtime " + fmt(lti_seconds) + " s over 2 min");
  if (o.pass) {
    o.detail << "0 violations, " << families << " families x " << trajs << " trajectories x 7 steps, "
             << fmt(lti_seconds) << " s";
  }
  return o;
}

Outcome right_inverse_bounds() {
  Outcome o;
  std::mt19937_64 gen(2024);
  std::vector<Matrix> phis;
  for (int i = 0; i < 100; ++i) {
    const Index d = 1 + static_cast<Index>(gen() % 8);
    const Index T = d + static_cast<Index>(gen() % (81 - d));
    phis.push_back(random_matrix(d, T, gen));
  }
  const ExperimentConfig cfg = config_from_json(default_lti_config());
  for (InputMode m : {InputMode::random, InputMode::designed}) {
    phis.push_back(DataSet::from_trajectories(collect_data(cfg, m).trajectories).Phi());
  }
  double worst_gap = 0.0;
  for (size_t i = 0; i < phis.size(); ++i) {
    const RightInverseResult pinv = pinv_right_inverse(phis[i]);
    const RightInverseResult row = row_norm_right_inverse(phis[i]);
    const SandwichCheck s = verify_sandwich(phis[i], row, 1e-6);
    o.require(s.holds, "sandwich fails on case " + std::to_string(i));
    o.require(row.row_norm_sum <= pinv.row_norm_sum + 1e-7, "row norm above pinv on case " + std::to_string(i));
    o.require(row.residual <= 1e-8, "residual " + fmt(row.residual) + " on case " + std::to_string(i));
    worst_gap = std::max(worst_gap, (row.row_norm_sum - row.lower_bound) / row.row_norm_sum);
  }
  if (o.pass) o.detail << phis.size() << " regressors, worst relative duality gap " << fmt(worst_gap);
  return o;
}

Outcome proxy_chain() {
  Outcome o;
  int first = 0, second = 0, hyp = 0, implied = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig cfg = config_from_json(default_lti_config());
    cfg.seed = static_cast<std::uint64_t>(s);
    const DataSet dr = DataSet::from_trajectories(collect_data(cfg, InputMode::random).trajectories);
    const DataSet da = DataSet::from_trajectories(collect_data(cfg, InputMode::designed).trajectories);
    const Zonotope& W = cfg.system.W;
    const double v_row = generator_norm_proxy(build_model_sets(da, W, row_norm_right_inverse(da.Phi()).H).mz);
    const double v_pinv_a = generator_norm_proxy(build_model_sets(da, W, pinv_right_inverse(da.Phi()).H).mz);
    const double v_pinv_r = generator_norm_proxy(build_model_sets(dr, W, pinv_right_inverse(dr.Phi()).H).mz);
    first += v_row <= v_pinv_a + 1e-7;
    second += v_pinv_a <= v_pinv_r + 1e-7;
    const Matrix Pa = da.Phi(), Pr = dr.Phi();
    const bool h = (Pa * Pa.transpose()).inverse().trace() <= (Pr * Pr.transpose()).inverse().trace();
    if (h) {
      ++hyp;
      implied += pseudoinverse(Pa).norm() <= pseudoinverse(Pr).norm() * (1.0 + 1e-12);
    }
  }
  o.require(first == seeds, "first inequality on " + std::to_string(first) + "/" + std::to_string(seeds));
  o.require(second >= (8 * seeds + 9) / 10,
            "second inequality on " + std::to_string(second) + "/" + std::to_string(seeds) + ", need 80%");
  o.require(implied == hyp, "trace hypothesis held on " + std::to_string(hyp) + " seeds, norm ordering on " +
                                std::to_string(implied));
  if (o.pass) {
    o.detail << "first " << first << "/" << seeds << ", second " << second << "/" << seeds << ", hypothesis "
             << hyp << "/" << seeds << " with implication on all";
  } else {
    o.detail << " (first " << first << ", second " << second << ", hypothesis " << hyp << ")";
  }
  return o;
}

Outcome volume_table() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::vector<double>> ratios;
  double model_volume = 0.0;
  for (int s = 0; s < 10; ++s) {
    json j = default_lti_config();
    j["seed"] = s;
    j["model_sets"] = {"mz"};
    j["outputs"]["volumes"] = true;
    const ExperimentResult r = run_lti_experiment(config_from_json(j));
    o.require(r.ok, "seed " + std::to_string(s) + " failed its self-check");
    for (const VolumeRow& v : r.volume_table) {
      ratios[v.method].push_back(v.ratio);
      if (v.method == "model") model_volume = v.volume;
    }
  }
  const double secs = seconds_since(t0);
  const double r_rand = median(ratios["mz_random_pinv"]);
  const double r_des = median(ratios["mz_designed_pinv"]);
  const double r_socp = median(ratios["mz_designed_row_norm"]);
  std::ostringstream med;
  med << "model volume " << fmt(model_volume) << ", median ratios rand-pinv " << fmt(r_rand) << ", des-pinv "
      << fmt(r_des) << ", des-row-norm " << fmt(r_socp) << ", " << fmt(secs) << " s";
  o.require(1.0 < r_socp && r_socp < r_des && r_des < r_rand, "ordering broken");
  auto band = [&](double got, double ref, const char* name) {
    o.require(std::abs(got - ref) <= 0.5 * ref, std::string(name) + " ratio " + fmt(got) + " outside " +
                                                    fmt(0.5 * ref) + ".." + fmt(1.5 * ref));
  };
  band(r_rand, 64.0, "rand-pinv");
  band(r_des, 42.1, "des-pinv");
  band(r_socp, 17.1, "des-row-norm");
  o.require(secs < 600.0, "runtime over 10 min");
  o.require(model_volume > 1.62e-4 && model_volume < 1.62e-2, "model volume not within an order of 1.62e-3");
  if (o.pass) o.detail << med.str();
  else o.detail << " (" << med.str() << ")";
  return o;
}

Outcome cmz_tightening() {
  Outcome o;
  const ExperimentResult& r = lti_seed0();
  Index checked = 0;
  double worst = -1e300;
  for (const auto& [id, c] : r.report["orderings"]["cmz_inside_mz"].items()) {
    ++checked;
    worst = std::max(worst, c["max_excess"].get<double>());
    o.require(c["holds"].get<bool>(), id + " exceeds its MZ counterpart by " + c["max_excess"].dump());
  }
  o.require(checked == 4, "expected 4 CMZ variants, got " + std::to_string(checked));
  o.require(r.report["config"]["checks"]["support_directions"] == 32, "direction count");
  if (o.pass) o.detail << checked << " CMZ variants, 32 directions, 7 steps, worst excess " << fmt(worst);
  return o;
}

Outcome sherman_morrison() {
  Outcome o;
  std::mt19937_64 gen(6);
  InfoState st = info_init(8);
  double worst_inv = 0.0, worst_trace = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Vector s = random_vector(8, gen);
    const double before = st.trace_inv();
    const double dA = delta_A(st, s);
    info_update(st, s);
    worst_trace = std::max(worst_trace, std::abs(before - dA - st.trace_inv()) / std::max(1.0, before));
    worst_inv = std::max(worst_inv, (st.S_inv - st.S.inverse()).norm());
  }
  Matrix S = 1e-3 * Matrix::Identity(8, 8);
  gen.seed(6);
  for (int k = 0; k < 200; ++k) {
    const Vector s = random_vector(8, gen);
    S += s * s.transpose();
  }
  o.require((S - st.S).norm() <= 1e-9 * S.norm(), "information matrix drifted");
  o.require(worst_inv <= 1e-8, "inverse error " + fmt(worst_inv));
  o.require(worst_trace <= 1e-10, "trace identity error " + fmt(worst_trace));
  if (o.pass) o.detail << "inverse error " << fmt(worst_inv) << ", trace identity error " << fmt(worst_trace);
  return o;
}

Outcome kernel_oracle() {
  Outcome o;
  double w_inf = 0.0, w_res = 0.0, w_model = 0.0;
  for (int s = 0; s < 20; ++s) {
    ExperimentConfig cfg = config_from_json(default_lti_config());
    cfg.seed = static_cast<std::uint64_t>(s);
    const InputMode mode = s % 2 ? InputMode::designed : InputMode::random;
    const DataSet d = DataSet::from_trajectories(collect_data(cfg, mode).trajectories);
    Matrix AB(5, 8);
    AB << cfg.system.A[0], cfg.system.B[0];
    for (RightInverseMethod m : {RightInverseMethod::pinv, RightInverseMethod::row_norm}) {
      const ModelSetBundle b = build_model_sets(d, cfg.system.W, compute_right_inverse(d.Phi(), m).H);
      const Vector beta = noise_coefficients(d.noise_factors);
      w_inf = std::max(w_inf, beta.cwiseAbs().maxCoeff() - 1.0);
      w_res = std::max(w_res, (b.cmz.A * beta - b.cmz.b).cwiseAbs().maxCoeff());
      Matrix M = b.mz.C;
      for (Index l = 0; l < beta.size(); ++l) M += beta(l) * b.mz.G[l];
      w_model = std::max(w_model, (M - AB).cwiseAbs().maxCoeff());
    }
  }
  o.require(w_inf <= 1e-9, "coefficient outside the box by " + fmt(w_inf));
  o.require(w_res <= 1e-9, "constraint residual " + fmt(w_res));
  o.require(w_model <= 1e-7, "model reconstruction error " + fmt(w_model));
  if (o.pass) {
    o.detail << "20 datasets x 2 inverses, constraint residual " << fmt(w_res) << ", model error " << fmt(w_model);
  }
  return o;
}

Outcome pwa() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, std::array<std::vector<double>, 2>> widths;
  for (int s = 0; s < 10; ++s) {
    json j = default_pwa_config();
    j["seed"] = s;
    j["checks"]["support_directions"] = 32;
    const ExperimentConfig cfg = config_from_json(j);
    const ExperimentResult r = run_pwa_experiment(cfg);
    const std::string tag = "seed " + std::to_string(s) + ": ";
    o.require(r.ok, tag + "self-check failed");
    for (const auto& [id, c] : r.report["orderings"]["model_inside"].items()) {
      o.require(c["holds"].get<bool>(), tag + id + " misses the reference by " + c["max_excess"].dump());
    }
    for (const auto& [id, f] : r.report["fragments"].items()) {
      o.require(f["within_binary_bound"].get<bool>(), tag + id + " exceeds 2^k fragments");
    }
    for (const auto& [id, rr] : r.reach) {
      for (size_t k = 0; k < rr.steps.size(); ++k) {
        o.require(rr.steps[k].fragments.size() <= (size_t{1} << k), tag + id + " fragment count");
        for (const Fragment& fr : rr.steps[k].fragments) {
          o.require(!is_empty(fr.set), tag + id + " keeps an empty fragment at step " + std::to_string(k));
        }
      }
      o.require(rr.steps.size() == 11, tag + id + " horizon");
    }
    for (const auto& [id, w] : r.report["hull_widths"].items()) {
      widths[id][0].push_back(w[0].get<double>());
      widths[id][1].push_back(w[1].get<double>());
    }
  }
  std::ostringstream med;
  for (const char* id : {"cmz_random_pinv", "cmz_designed_row_norm"}) {
    med << id << " median widths (" << fmt(median(widths[id][0])) << ", " << fmt(median(widths[id][1])) << ") ";
  }
  for (int c = 0; c < 2; ++c) {
    o.require(median(widths["cmz_designed_row_norm"][c]) <= median(widths["cmz_random_pinv"][c]),
              "designed wider than random in coordinate " + std::to_string(c + 1));
  }
  med << fmt(seconds_since(t0)) << " s";
  if (o.pass) o.detail << med.str();
  else o.detail << " (" << med.str() << ")";
  return o;
}

Outcome set_operations() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(9);
  int fails = 0;
  for (int i = 0; i < 200; ++i) {
    const Index n = 1 + static_cast<Index>(gen() % 4);
    const ConstrainedZonotope a = random_cz(n, 4, static_cast<Index>(gen() % 2), gen);
    const ConstrainedZonotope b = random_cz(n, 3, static_cast<Index>(gen() % 2), gen);
    const Vector pa = sample_member(a, gen), pb = sample_member(b, gen);
    fails += !contains_point(minkowski_sum(a, b), pa + pb, 1e-7);
    Vector pp(2 * n);
    pp << pa, pb;
    fails += !contains_point(cartesian_product(a, b), pp, 1e-7);
    const Matrix M = random_matrix(1 + static_cast<Index>(gen() % 4), n, gen);
    fails += !contains_point(linear_map(M, a), M * pa, 1e-7);
  }
  o.require(fails == 0, std::to_string(fails) + " sampled containment failures");

  int girard_fail = 0;
  for (int i = 0; i < 20; ++i) {
    const Index n = 2 + static_cast<Index>(gen() % 4);
    const Zonotope z(random_vector(n, gen), random_matrix(n, 30, gen));
    const Zonotope r = reduce_girard(z, 2.0);
    o.require(r.num_generators() <= 2 * n, "reduction kept too many generators");
    const ConstrainedZonotope cz(z), cr(r);
    for (int k = 0; k < 64; ++k) {
      const Vector d = random_unit(n, gen);
      girard_fail += support(cr, d) < support(cz, d) - 1e-9;
    }
  }
  o.require(girard_fail == 0, std::to_string(girard_fail) + " Girard support violations");

  double worst_mc = 0.0;
  for (Index n = 1; n <= 3; ++n) {
    const Zonotope z(Vector::Zero(n), random_matrix(n, n + 2, gen));
    const ConstrainedZonotope cz(z);
    const Interval box = interval_hull(z);
    const double box_vol = (box.upper - box.lower).prod();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int N = 40000;
    int hits = 0;
    for (int k = 0; k < N; ++k) {
      Vector x(n);
      for (Index i = 0; i < n; ++i) x(i) = box.lower(i) + u(gen) * (box.upper(i) - box.lower(i));
      hits += contains_point(cz, x, 0.0);
    }
    const double mc = box_vol * hits / N;
    worst_mc = std::max(worst_mc, std::abs(mc - volume(z)) / volume(z));
  }
  o.require(worst_mc <= 0.05, "volume differs from Monte-Carlo by " + fmt(100 * worst_mc) + "%");

  int uncovered = 0;
  for (int i = 0; i < 50; ++i) {
    const Index n = 2 + static_cast<Index>(gen() % 2);
    const ConstrainedZonotope z = random_cz(n, 5, 1, gen);
    const Vector h = random_unit(n, gen);
    const double c = h.dot(sample_member(z, gen));
    const MaybeCz lo = halfspace_intersection(z, h, c), hi = halfspace_intersection(z, -h, -c);
    for (int k = 0; k < 20; ++k) {
      const Vector x = sample_member(z, gen);
      const bool in = (lo && contains_point(*lo, x, 1e-7)) || (hi && contains_point(*hi, x, 1e-7));
      uncovered += !in;
    }
  }
  o.require(uncovered == 0, std::to_string(uncovered) + " points outside both halves");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime " + fmt(secs) + " s over 1 min");
  if (o.pass) {
    o.detail << "600 containment trials, 1280 Girard directions, volume vs Monte-Carlo " << fmt(100 * worst_mc)
             << "%, 1000 split samples, " << fmt(secs) << " s";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"soundness", soundness},
      {"right-inverse bounds", right_inverse_bounds},
      {"proxy chain", proxy_chain},
      {"volume table", volume_table},
      {"CMZ tightening", cmz_tightening},
      {"Sherman-Morrison", sherman_morrison},
      {"kernel consistency", kernel_oracle},
      {"PWA experiment", pwa},
      {"set operations", set_operations},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail.str(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
