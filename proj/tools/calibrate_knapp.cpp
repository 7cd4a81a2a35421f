// Regenerates data/knapp_constants.json. Usage:
//   calibrate_knapp [out.json]
#include <cstdio>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "nlslab/bessel.hpp"

int main(int argc, char** argv) {
  const std::string out_path =
      argc > 1 ? argv[1] : std::string(NLSLAB_DATA_DIR) + "/knapp_constants.json";
  const std::vector<std::pair<int, int>> pairs = {
      {2, 1}, {3, 1}, {3, 2}, {4, 1}, {4, 2}, {4, 3}, {5, 2}, {6, 2}, {6, 3}};
  nlohmann::json j;
  j["note"] =
      "Constants for the annulus-product lower-bound sets: c0 from the longest "
      "sound window prefix at (m, delta) = (0.05, 0.1); c1, c2 minima over "
      "dense samples with a 0.9 safety factor; c_small at its per-k default.";
  j["constants"] = nlohmann::json::array();
  for (auto [d, k] : pairs) {
    const auto kc = nlslab::calibrate_knapp_constants(d, k);
    j["constants"].push_back({{"d", d},
                              {"k", k},
                              {"c0", kc.c0},
                              {"c1", kc.c1},
                              {"c2", kc.c2},
                              {"c_small", nlslab::default_c_small(k)}});
    std::printf("d=%d k=%d  c0=%.6g c1=%.6g c2=%.6g\n", d, k, kc.c0, kc.c1,
                kc.c2);
  }
  std::ofstream out(out_path);
  out << j.dump(2) << "\n";
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}
