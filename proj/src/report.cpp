#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "limo/bench.hpp"

namespace limo {

using ordered_json = nlohmann::ordered_json;

std::optional<double> TaskReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::string TaskReport::to_json() const {
  ordered_json j;
  j["task"] = task;
  j["run_id"] = run_id;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  ordered_json mts = ordered_json::object();
  for (const auto& [k, v] : metrics) mts[k] = v;
  j["metrics"] = mts;
  ordered_json mols = ordered_json::array();
  for (const auto& m : top) {
    ordered_json jm;
    jm["key"] = m.key;
    jm["smiles"] = m.smiles;
    ordered_json sc = ordered_json::object();
    for (const auto& [k, v] : m.scores) sc[k] = v;
    jm["scores"] = sc;
    mols.push_back(jm);
  }
  j["molecules"] = mols;
  if (!warnings.empty()) j["warnings"] = warnings;
  if (include_timing) j["wall_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

std::string TaskReport::to_plot_json() const {
  ordered_json j;
  j["task"] = task;
  j["run_id"] = run_id;
  ordered_json series = ordered_json::object();
  for (const auto& [name, values] : distributions) series[name] = values;
  j["series"] = series;
  return j.dump(2) + "\n";
}

std::string TaskReport::to_csv() const {
  std::ostringstream os;
  os << "section,name,value\n";
  for (const auto& [k, v] : config) os << "config," << k << "," << v << "\n";
  for (const auto& [k, v] : metrics) {
    os << "metric," << k << "," << ordered_json(v).dump() << "\n";
  }
  for (const auto& m : top) {
    os << "molecule," << m.key << "," << m.smiles;
    for (const auto& [k, v] : m.scores)
      os << ";" << k << "=" << ordered_json(v).dump();
    os << "\n";
  }
  if (include_timing)
    os << "timing,wall_seconds," << ordered_json(wall_seconds).dump() << "\n";
  return os.str();
}

std::string TaskReport::to_text() const {
  std::ostringstream os;
  os << "== " << task << " (run " << run_id << ") ==\n";
  if (!config.empty()) {
    os << "config:\n";
    for (const auto& [k, v] : config) os << "  " << k << " = " << v << "\n";
  }
  os << "metrics:\n";
  for (const auto& [k, v] : metrics)
    os << "  " << k << " = " << ordered_json(v).dump() << "\n";
  if (!top.empty()) {
    os << "molecules:\n";
    for (const auto& m : top) {
      os << "  " << m.smiles;
      for (const auto& [k, v] : m.scores)
        os << "  " << k << "=" << ordered_json(v).dump();
      os << "\n";
    }
  }
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  if (include_timing) os << "wall_seconds: " << wall_seconds << "\n";
  return os.str();
}

void TaskReport::write_files(const std::string& base_path) const {
  {
    std::ofstream os(base_path + ".json", std::ios::trunc);
    os << to_json();
  }
  {
    std::ofstream os(base_path + ".csv", std::ios::trunc);
    os << to_csv();
  }
  {
    std::ofstream os(base_path + ".txt", std::ios::trunc);
    os << to_text();
  }
  if (!distributions.empty()) {
    std::ofstream os(base_path + ".plot.json", std::ios::trunc);
    os << to_plot_json();
  }
}

}  // namespace limo
