#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ddreach/harness.hpp"

using namespace ddreach;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "out";
  std::string format = "csv";
  int seeds = 10;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json load_config(const Options& o, const std::string& kind) {
  json j;
  if (o.config.empty()) {
    j = kind == "pwa" ? default_pwa_config() : default_lti_config();
  } else {
    std::ifstream f(o.config);
    if (!f) throw std::invalid_argument("cannot open config " + o.config);
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config " + o.config + ": " + e.what());
    }
  }
  if (o.seed_given) j["seed"] = o.seed;
  if (j.value("kind", "") != kind) throw std::invalid_argument("config kind is not '" + kind + "'");
  return j;
}

TableFormat table_format(const std::string& s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "json") return TableFormat::json;
  throw std::invalid_argument("--format must be json or csv");
}

void write_metadata(const std::string& dir, const std::string& command, const std::string& started,
                    double wall, const json& timings, bool ok) {
  std::filesystem::create_directories(dir);
  json meta = {{"command", command},
               {"started_utc", started},
               {"finished_utc", utc_now()},
               {"wall_seconds", wall},
               {"timings", timings},
               {"ok", ok}};
  std::ofstream(std::filesystem::path(dir) / "metadata.json") << meta.dump(2) << "\n";
}

int run_experiment(const Options& o, const std::string& kind) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const TableFormat fmt = table_format(o.format);
  const ExperimentConfig cfg = config_from_json(load_config(o, kind));
  const ExperimentResult r = kind == "lti" ? run_lti_experiment(cfg) : run_pwa_experiment(cfg);
  write_outputs(r, cfg, o.out, fmt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(o.out, kind, started, wall, r.timings, r.ok);
  if (kind == "lti") {
    for (const VolumeRow& v : r.volume_table) {
      std::cout << v.method << "  volume " << v.volume << "  ratio " << v.ratio << "\n";
    }
  } else {
    for (const auto& [id, w] : r.report["hull_widths"].items()) std::cout << id << "  hull widths " << w.dump() << "\n";
  }
  if (!r.ok) {
    std::cerr << "containment self-check failed; see " << o.out << "/report.json\n";
    return 3;
  }
  return 0;
}

int run_volume_table(const Options& o) {
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const TableFormat fmt = table_format(o.format);
  json base = load_config(o, "lti");
  base["model_sets"] = {"mz"};
  base["outputs"]["volumes"] = true;
  std::map<std::string, std::vector<double>> ratios, volumes;
  std::vector<std::string> order;
  json rows = json::array();
  bool ok = true;
  const std::uint64_t first = base.value("seed", std::uint64_t{0});
  for (int s = 0; s < o.seeds; ++s) {
    base["seed"] = first + static_cast<std::uint64_t>(s);
    const ExperimentConfig cfg = config_from_json(base);
    const ExperimentResult r = run_lti_experiment(cfg);
    ok = ok && r.ok;
    for (const VolumeRow& v : r.volume_table) {
      if (!ratios.count(v.method)) order.push_back(v.method);
      ratios[v.method].push_back(v.ratio);
      volumes[v.method].push_back(v.volume);
      rows.push_back({{"seed", cfg.seed}, {"method", v.method}, {"volume", v.volume}, {"ratio", v.ratio}});
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  json med = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "seed,method,volume,ratio_to_model\n";
  for (const json& r : rows) {
    csv << r["seed"].get<std::uint64_t>() << "," << r["method"].get<std::string>() << ","
        << r["volume"].get<double>() << "," << r["ratio"].get<double>() << "\n";
  }
  for (const std::string& m : order) {
    const double mv = median(volumes[m]), mr = median(ratios[m]);
    med.push_back({{"method", m}, {"median_volume", mv}, {"median_ratio", mr}});
    csv << "median," << m << "," << mv << "," << mr << "\n";
    std::cout << m << "  median volume " << mv << "  median ratio " << mr << "\n";
  }
  std::filesystem::create_directories(o.out);
  const json doc = {{"rows", rows}, {"median", med}, {"seeds", o.seeds}, {"first_seed", first}};
  std::ofstream(std::filesystem::path(o.out) / (fmt == TableFormat::csv ? "volume_table.csv" : "volume_table.json"))
      << (fmt == TableFormat::csv ? csv.str() : doc.dump(2) + "\n");
  std::ofstream(std::filesystem::path(o.out) / "report.json") << doc.dump(2) << "\n";
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_metadata(o.out, "volume-table", started, wall, json::object(), ok);
  return ok ? 0 : 3;
}

int run_selftest_cmd(const Options& o) {
  bool ok = true;
  for (const SelftestCase& c : run_selftest(o.seed)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven reachability experiments"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment config (bundled default when omitted)");
    sub->add_option("--seed", o.seed, "RNG seed, overrides the config")->each([&](const std::string&) {
      o.seed_given = true;
    });
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--format", o.format, "table format")->check(CLI::IsMember({"json", "csv"}));
  };
  CLI::App* lti = app.add_subcommand("lti", "LTI experiment: model sets, reachable sets, volumes");
  CLI::App* pwa = app.add_subcommand("pwa", "PWA experiment: per-mode model sets and guard splitting");
  CLI::App* vol = app.add_subcommand("volume-table", "final-step volumes of the MZ variants over several seeds");
  CLI::App* self = app.add_subcommand("selftest", "run the invariant checks");
  add_common(lti);
  add_common(pwa);
  add_common(vol);
  vol->add_option("--seeds", o.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  self->add_option("--seed", o.seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (lti->parsed()) return run_experiment(o, "lti");
    if (pwa->parsed()) return run_experiment(o, "pwa");
    if (vol->parsed()) return run_volume_table(o);
    if (self->parsed()) return run_selftest_cmd(o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
