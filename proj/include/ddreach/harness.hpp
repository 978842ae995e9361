#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ddreach/inputdesign.hpp"
#include "ddreach/modelset.hpp"
#include "ddreach/reach.hpp"
#include "ddreach/rightinv.hpp"

namespace ddreach {

/// Zero-order-hold discretization: A = exp(A_c dt), B = int_0^dt exp(A_c s) ds B_c,
/// both read off the exponential of the augmented matrix [A_c B_c; 0 0] dt.
std::pair<Matrix, Matrix> discretize(const Matrix& A_c, const Matrix& B_c, double dt);

/// Independent generator for (seed, stream id).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id);

Vector sample_zonotope(const Zonotope& z, std::mt19937_64& rng);

/// The plant behind the data. One (A, B) pair per mode; the regions of pwa
/// select the mode when there is more than one.
struct TrueSystem {
  std::vector<Matrix> A;
  std::vector<Matrix> B;
  PwaSpec pwa;
  Zonotope W;

  Index n_x() const { return A.at(0).rows(); }
  Index n_u() const { return B.at(0).cols(); }
  Index num_modes() const { return static_cast<Index>(A.size()); }
  int mode_of(const Vector& x) const;
  // x+ = A_q x + B_q u + c_w + G_w xi with q = mode_of(x)
  Vector step(const Vector& x, const Vector& u, const Vector& xi, int* mode = nullptr) const;
  void validate() const;
};

/// Runs the inputs (one column per step) with noise factors drawn uniformly
/// from the box; factors and modes are recorded.
Trajectory simulate(const TrueSystem& sys, const Vector& x0, const Matrix& inputs,
                    std::mt19937_64& rng);

enum class InputMode { random, designed };
enum class ModelSetType { mz, cmz };
const char* to_string(InputMode m);
const char* to_string(ModelSetType m);

struct Combination {
  InputMode input = InputMode::random;
  RightInverseMethod inverse = RightInverseMethod::pinv;
  ModelSetType model = ModelSetType::mz;
  std::string id() const;  // "<model>_<input>_<inverse>"
};

struct ExperimentConfig {
  std::string kind;  // "lti" or "pwa"
  TrueSystem system;
  Zonotope X0;
  Zonotope U;       // data collection
  Zonotope U_prop;  // propagation
  std::vector<Zonotope> data_initial_sets;
  Index K = 12;
  Index T_i = 5;
  Index horizon = 6;
  Index max_generators = 50;
  Index max_fragments = 256;
  std::vector<Combination> combinations;
  std::uint64_t seed = 0;
  DesignConfig design;
  double delta = 1e-3;
  Index check_trajectories = 200;
  Index support_directions = 32;
  double tolerance = 1e-6;
  std::vector<std::array<Index, 2>> polygon_dims;  // 0-based
  Index polygon_directions = 64;
  bool volumes = true;
  Index volume_generators = 50;  // reduction target before volume
  json source;  // the parsed document, echoed into the report
};

json default_lti_config();
json default_pwa_config();
/// Validates the document and the dimensions of every set against the
/// system. Throws std::invalid_argument with a readable message.
ExperimentConfig config_from_json(const json& j);

struct CollectedData {
  std::vector<Trajectory> trajectories;
  std::vector<DesignLogEntry> design_log;
};

// Initial states and noise come from streams shared by both input modes, so
// random and designed data differ only through the inputs.
struct DataStreams {
  std::mt19937_64 states, noise, inputs;
  static DataStreams make(std::uint64_t seed, InputMode mode);
};

/// K runs of T_i steps. Random mode samples inputs uniformly from U;
/// designed mode picks them by design_input with one information matrix per
/// mode shared over all runs.
CollectedData collect_data(const ExperimentConfig& cfg, InputMode mode, DataStreams& streams);
CollectedData collect_data(const ExperimentConfig& cfg, InputMode mode);

struct VolumeRow {
  std::string method;
  double volume = 0.0;
  double ratio = 0.0;
  Index generators = 0;
};

struct ExperimentResult {
  json report;
  json timings;  // seconds per phase, kept out of the report
  std::map<std::string, ReachResult> reach;  // by combination id and "model"
  std::vector<VolumeRow> volume_table;
  bool ok = true;
};

ExperimentResult run_lti_experiment(const ExperimentConfig& cfg);
ExperimentResult run_pwa_experiment(const ExperimentConfig& cfg);

enum class TableFormat { json, csv };

/// report.json, sets/<combo>/step<k>.json, polygons/<combo>_<dims>.<ext> and
/// volume_table.<ext> (LTI) or hull_widths.<ext> (PWA).
void write_outputs(const ExperimentResult& r, const ExperimentConfig& cfg, const std::string& dir,
                   TableFormat fmt);

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<SelftestCase> run_selftest(std::uint64_t seed = 0);

}  // namespace ddreach
