#include "ddreach/harness.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "ddreach/default_configs.hpp"

namespace ddreach {

std::pair<Matrix, Matrix> discretize(const Matrix& A_c, const Matrix& B_c, double dt) {
  const Index n = A_c.rows();
  const Index m = B_c.cols();
  if (A_c.cols() != n || B_c.rows() != n) throw DimensionError("discretize: shapes");
  if (!(dt > 0.0)) throw std::invalid_argument("discretize: dt must be positive");
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A_c * dt;
  aug.topRightCorner(n, m) = B_c * dt;
  const Matrix E = aug.exp();
  return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

Vector sample_zonotope(const Zonotope& z, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector xi(z.num_generators());
  for (Index i = 0; i < xi.size(); ++i) xi(i) = u(rng);
  return z.c + z.G * xi;
}

int TrueSystem::mode_of(const Vector& x) const {
  if (num_modes() == 1) return 0;
  return pwa.mode_of(x);
}

Vector TrueSystem::step(const Vector& x, const Vector& u, const Vector& xi, int* mode) const {
  const int q = mode_of(x);
  if (q < 0) throw std::domain_error("simulate: state outside every region");
  if (mode) *mode = q;
  return A[q] * x + B[q] * u + W.c + W.G * xi;
}

void TrueSystem::validate() const {
  if (A.empty() || A.size() != B.size()) throw std::invalid_argument("system: need (A, B) per mode");
  for (size_t q = 0; q < A.size(); ++q) {
    if (A[q].rows() != A[q].cols() || A[q].rows() != n_x() || B[q].rows() != n_x() ||
        B[q].cols() != n_u()) {
      throw DimensionError("system: mode matrices have inconsistent shapes");
    }
  }
  if (W.dim() != n_x()) throw DimensionError("system: noise set dimension");
  if (num_modes() > 1 && pwa.num_modes() != num_modes()) {
    throw std::invalid_argument("system: one region per mode expected");
  }
}

Trajectory simulate(const TrueSystem& sys, const Vector& x0, const Matrix& inputs,
                    std::mt19937_64& rng) {
  if (x0.size() != sys.n_x() || inputs.rows() != sys.n_u()) throw DimensionError("simulate: shapes");
  const Index T = inputs.cols();
  const Index pw = sys.W.num_generators();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Trajectory t;
  t.X.resize(sys.n_x(), T + 1);
  t.U = inputs;
  t.noise_factors.resize(pw, T);
  t.X.col(0) = x0;
  for (Index k = 0; k < T; ++k) {
    for (Index j = 0; j < pw; ++j) t.noise_factors(j, k) = u(rng);
    int q = 0;
    t.X.col(k + 1) = sys.step(t.X.col(k), inputs.col(k), t.noise_factors.col(k), &q);
    t.modes.push_back(q);
  }
  return t;
}

const char* to_string(InputMode m) { return m == InputMode::random ? "random" : "designed"; }
const char* to_string(ModelSetType m) { return m == ModelSetType::mz ? "mz" : "cmz"; }

std::string Combination::id() const {
  return std::string(to_string(model)) + "_" + to_string(input) + "_" + to_string(inverse);
}

json default_lti_config() { return json::parse(detail::kLtiDefaultConfig); }
json default_pwa_config() { return json::parse(detail::kPwaDefaultConfig); }

namespace {

InputMode input_mode_from_string(const std::string& s) {
  if (s == "random") return InputMode::random;
  if (s == "designed") return InputMode::designed;
  throw std::invalid_argument("unknown input mode '" + s + "'");
}

ModelSetType model_set_from_string(const std::string& s) {
  if (s == "mz") return ModelSetType::mz;
  if (s == "cmz") return ModelSetType::cmz;
  throw std::invalid_argument("unknown model set '" + s + "'");
}

Zonotope read_set(const json& j, const char* key, Index dim) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("config: missing '") + key + "'");
  Zonotope z;
  try {
    z = zonotope_from_json(j[key]);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: '") + key + "': " + e.what());
  }
  if (z.dim() != dim) {
    throw std::invalid_argument(std::string("config: '") + key + "' has dimension " +
                                std::to_string(z.dim()) + ", expected " + std::to_string(dim));
  }
  return z;
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j[key].get<T>() : fallback;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    const int version = value_or<int>(j, "schema_version", 0);
    if (version != 1) throw std::invalid_argument("unsupported schema_version " + std::to_string(version));
    cfg.kind = j.at("kind").get<std::string>();
    const json& sys = j.at("system");
    if (cfg.kind == "lti") {
      if (sys.contains("A_c")) {
        const auto [A, B] = discretize(matrix_from_json(sys.at("A_c")), matrix_from_json(sys.at("B_c")),
                                       sys.at("dt").get<double>());
        cfg.system.A = {A};
        cfg.system.B = {B};
      } else {
        cfg.system.A = {matrix_from_json(sys.at("A"))};
        cfg.system.B = {matrix_from_json(sys.at("B"))};
      }
    } else if (cfg.kind == "pwa") {
      for (const json& mode : sys.at("modes")) {
        cfg.system.A.push_back(matrix_from_json(mode.at("A")));
        cfg.system.B.push_back(matrix_from_json(mode.at("B")));
        Region r;
        for (const json& hs : mode.at("region")) {
          r.halfspaces.push_back(Halfspace{vector_from_json(hs.at("h")), hs.at("c").get<double>()});
        }
        cfg.system.pwa.regions.push_back(std::move(r));
      }
      cfg.system.pwa.A = cfg.system.A;
      cfg.system.pwa.B = cfg.system.B;
    } else {
      throw std::invalid_argument("kind must be 'lti' or 'pwa'");
    }
    if (cfg.system.A.empty()) throw std::invalid_argument("system has no modes");
    const Index n = cfg.system.A[0].rows();
    const Index m = cfg.system.B[0].cols();
    cfg.system.W = read_set(j, "W", n);
    cfg.system.validate();
    for (const Region& r : cfg.system.pwa.regions)
      for (const Halfspace& hs : r.halfspaces)
        if (hs.h.size() != n) throw std::invalid_argument("region normal has the wrong length");
    cfg.X0 = read_set(j, "X0", n);
    cfg.U = read_set(j, "U", m);
    cfg.U_prop = j.contains("U_prop") ? read_set(j, "U_prop", m) : cfg.U;
    if (j.contains("data_initial_sets")) {
      for (const json& s : j["data_initial_sets"]) {
        json wrap = {{"s", s}};
        cfg.data_initial_sets.push_back(read_set(wrap, "s", n));
      }
    }
    cfg.K = j.at("K").get<Index>();
    cfg.T_i = j.at("T_i").get<Index>();
    cfg.horizon = j.at("horizon").get<Index>();
    if (cfg.K < 1 || cfg.T_i < 1 || cfg.horizon < 0) throw std::invalid_argument("K, T_i must be >= 1, horizon >= 0");
    cfg.max_generators = value_or<Index>(j, "max_generators", 50);
    cfg.max_fragments = value_or<Index>(j, "max_fragments", 256);
    if (cfg.max_generators < n) throw std::invalid_argument("max_generators below the state dimension");
    cfg.seed = value_or<std::uint64_t>(j, "seed", 0);

    if (j.contains("combinations")) {
      for (const json& c : j["combinations"]) {
        cfg.combinations.push_back(Combination{input_mode_from_string(c.at("input")),
                                               right_inverse_method_from_string(c.at("inverse")),
                                               model_set_from_string(c.at("model"))});
      }
    } else {
      for (const json& mi : j.at("model_sets"))
        for (const json& im : j.at("input_modes"))
          for (const json& ri : j.at("right_inverses"))
            cfg.combinations.push_back(Combination{input_mode_from_string(im),
                                                   right_inverse_method_from_string(ri),
                                                   model_set_from_string(mi)});
    }
    if (cfg.combinations.empty()) throw std::invalid_argument("no combinations requested");

    if (j.contains("design")) {
      const json& d = j["design"];
      cfg.design.n_candidates = value_or<Index>(d, "n_candidates", 100);
      cfg.design.refine_iters = value_or<Index>(d, "refine_iters", 50);
      cfg.design.refine_step = value_or<double>(d, "refine_step", 1.0);
      cfg.delta = value_or<double>(d, "delta", 1e-3);
      if (cfg.design.n_candidates < 1) throw std::invalid_argument("design.n_candidates must be >= 1");
      if (!(cfg.delta > 0.0)) throw std::invalid_argument("design.delta must be positive");
    }
    if (j.contains("checks")) {
      const json& c = j["checks"];
      cfg.check_trajectories = value_or<Index>(c, "containment_trajectories", 200);
      cfg.support_directions = value_or<Index>(c, "support_directions", 32);
      cfg.tolerance = value_or<double>(c, "tolerance", 1e-6);
    }
    if (j.contains("outputs")) {
      const json& o = j["outputs"];
      if (o.contains("polygon_dims")) {
        for (const json& d : o["polygon_dims"]) {
          const Index a = d.at(0).get<Index>() - 1, b = d.at(1).get<Index>() - 1;
          if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw std::invalid_argument("bad polygon_dims entry");
          cfg.polygon_dims.push_back({a, b});
        }
      }
      cfg.polygon_directions = value_or<Index>(o, "polygon_directions", 64);
      cfg.volumes = value_or<bool>(o, "volumes", cfg.kind == "lti");
      cfg.volume_generators = value_or<Index>(o, "volume_generators", 50);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.source = j;
  return cfg;
}

DataStreams DataStreams::make(std::uint64_t seed, InputMode mode) {
  return DataStreams{make_stream(seed, 1), make_stream(seed, 2), make_stream(seed, 3 + static_cast<std::uint64_t>(mode))};
}

CollectedData collect_data(const ExperimentConfig& cfg, InputMode mode) {
  DataStreams streams = DataStreams::make(cfg.seed, mode);
  return collect_data(cfg, mode, streams);
}

CollectedData collect_data(const ExperimentConfig& cfg, InputMode mode, DataStreams& streams) {
  const TrueSystem& sys = cfg.system;
  const Index n = sys.n_x();
  const Index m = sys.n_u();
  CollectedData out;
  std::vector<InfoState> info(sys.num_modes(), info_init(n + m, cfg.delta));
  const ConstrainedZonotope U(cfg.U);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Index i = 0; i < cfg.K; ++i) {
    const Zonotope& start = cfg.data_initial_sets.empty()
                                ? cfg.X0
                                : cfg.data_initial_sets[i % cfg.data_initial_sets.size()];
    Trajectory t;
    t.X.resize(n, cfg.T_i + 1);
    t.U.resize(m, cfg.T_i);
    t.noise_factors.resize(sys.W.num_generators(), cfg.T_i);
    t.X.col(0) = sample_zonotope(start, streams.states);
    for (Index k = 0; k < cfg.T_i; ++k) {
      const Vector x = t.X.col(k);
      Vector u;
      if (mode == InputMode::random) {
        u = sample_input(U, streams.inputs);
      } else {
        const int q = std::max(0, sys.mode_of(x));
        const DesignChoice c = design_input(info[q], x, U, cfg.design, streams.inputs);
        u = c.u;
        Vector s(n + m);
        s << x, u;
        info_update(info[q], s);
        out.design_log.push_back(DesignLogEntry{i, k, u, c.delta_A, info[q].trace_inv()});
      }
      t.U.col(k) = u;
      for (Index j = 0; j < t.noise_factors.rows(); ++j) t.noise_factors(j, k) = unit(streams.noise);
      int q = 0;
      t.X.col(k + 1) = sys.step(x, u, t.noise_factors.col(k), &q);
      t.modes.push_back(q);
    }
    out.trajectories.push_back(std::move(t));
  }
  return out;
}

}  // namespace ddreach
