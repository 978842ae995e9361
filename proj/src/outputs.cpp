#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ddreach/harness.hpp"

namespace ddreach {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

void write_outputs(const ExperimentResult& r, const ExperimentConfig& cfg, const std::string& dir,
                   TableFormat fmt) {
  const fs::path root(dir);
  fs::create_directories(root / "sets");
  fs::create_directories(root / "polygons");
  write_text(root / "report.json", r.report.dump(2) + "\n");
  const char* ext = fmt == TableFormat::csv ? ".csv" : ".json";

  for (const auto& [id, reach] : r.reach) {
    fs::create_directories(root / "sets" / id);
    for (Index k = 0; k <= reach.horizon(); ++k) {
      json j = to_json(reach.steps[k]);
      j["step"] = k;
      write_text(root / "sets" / id / ("step" + std::to_string(k) + ".json"), j.dump() + "\n");
    }
    for (const auto& dims : cfg.polygon_dims) {
      const std::string name =
          id + "_" + std::to_string(dims[0] + 1) + "-" + std::to_string(dims[1] + 1) + ext;
      std::ostringstream csv;
      json jp = json::array();
      csv << "step,fragment,vertex,x,y\n";
      for (Index k = 0; k <= reach.horizon(); ++k) {
        const auto& frs = reach.steps[k].fragments;
        for (size_t f = 0; f < frs.size(); ++f) {
          if (frs[f].set.has_constraints() && is_empty(frs[f].set)) continue;
          const auto poly = project_polygon(frs[f].set, dims, cfg.polygon_directions);
          json verts = json::array();
          for (size_t v = 0; v < poly.size(); ++v) {
            csv << k << "," << f << "," << v << "," << num(poly[v][0]) << "," << num(poly[v][1]) << "\n";
            verts.push_back({poly[v][0], poly[v][1]});
          }
          jp.push_back({{"step", k}, {"fragment", f}, {"vertices", verts}});
        }
      }
      write_text(root / "polygons" / name, fmt == TableFormat::csv ? csv.str() : jp.dump() + "\n");
    }
  }

  if (!r.volume_table.empty()) {
    std::ostringstream csv;
    csv << "method,volume,ratio_to_model,generators\n";
    for (const VolumeRow& v : r.volume_table) {
      csv << v.method << "," << num(v.volume) << "," << num(v.ratio) << "," << v.generators << "\n";
    }
    write_text(root / (std::string("volume_table") + ext),
               fmt == TableFormat::csv ? csv.str() : r.report["volume_table"].dump(2) + "\n");
  }
  if (r.report.contains("hull_widths")) {
    std::ostringstream csv;
    csv << "method";
    const Index n = cfg.system.n_x();
    for (Index i = 0; i < n; ++i) csv << ",width_x" << (i + 1);
    csv << "\n";
    for (const auto& [id, w] : r.report["hull_widths"].items()) {
      csv << id;
      for (const auto& v : w) csv << "," << num(v.get<double>());
      csv << "\n";
    }
    write_text(root / (std::string("hull_widths") + ext),
               fmt == TableFormat::csv ? csv.str() : r.report["hull_widths"].dump(2) + "\n");
  }
}

}  // namespace ddreach
