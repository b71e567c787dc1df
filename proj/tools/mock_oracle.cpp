// Test oracle speaking the JSON-lines protocol on stdin/stdout. Modes:
//   echo       score 0.0 for everything
//   heavy      score = heavy-atom count of the SMILES
//   neg-heavy  score = -heavyAtoms / 10 (a docking-like pseudo energy)
//   shuffle    like heavy, but responses are buffered and emitted in
//              reverse order
//   drop-first like heavy, but the first request never gets a response
//   garbage    emits a malformed line for every odd id
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace {

int heavy_atoms(const std::string& smiles) {
  int count = 0;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    char c = smiles[i];
    if (c == 'C' && i + 1 < smiles.size() && smiles[i + 1] == 'l') {
      ++count;
      ++i;
    } else if (c == 'B' && i + 1 < smiles.size() && smiles[i + 1] == 'r') {
      ++count;
      ++i;
    } else if (c == 'C' || c == 'N' || c == 'O' || c == 'F' || c == 'S' ||
               c == 'P') {
      ++count;
    }
  }
  return count;
}

}  // namespace

int main(int argc, char** argv) {
  std::string mode = argc > 1 ? argv[1] : "echo";
  std::vector<std::string> deferred;
  bool first = true;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id")) continue;
    long id = j["id"].get<long>();
    std::string smiles = j.value("smiles", "");

    if (mode == "drop-first" && first) {
      first = false;
      continue;
    }
    double score = 0.0;
    if (mode == "heavy" || mode == "shuffle" || mode == "drop-first") {
      score = heavy_atoms(smiles);
    } else if (mode == "neg-heavy") {
      score = -heavy_atoms(smiles) / 10.0;
    }
    if (mode == "garbage" && id % 2 == 1) {
      std::cout << "not json at all\n" << std::flush;
      continue;
    }
    nlohmann::json out;
    out["id"] = id;
    out["score"] = score;
    if (mode == "shuffle") {
      deferred.push_back(out.dump());
      if (deferred.size() >= 8) {
        for (auto it = deferred.rbegin(); it != deferred.rend(); ++it)
          std::cout << *it << "\n";
        std::cout << std::flush;
        deferred.clear();
      }
      continue;
    }
    std::cout << out.dump() << "\n" << std::flush;
  }
  for (auto it = deferred.rbegin(); it != deferred.rend(); ++it)
    std::cout << *it << "\n";
  std::cout << std::flush;
  return 0;
}
