// Small saturation sweep: prints the RMSE of each method at a few scale factors.

#include <cstdio>

#include "hdrpmp/hdrpmp.hpp"

int main() {
  hdrpmp::ExperimentConfig cfg;
  cfg.width = cfg.height = 128;
  cfg.scale_factors = {1.0, 1.6, 2.2};
  const hdrpmp::RmseTable table = hdrpmp::run_table1(cfg);

  std::printf("%-6s", "S");
  for (auto m : cfg.methods) std::printf(" %14s", hdrpmp::to_string(m));
  std::printf("\n");
  for (std::size_t s = 0; s < cfg.scale_factors.size(); ++s) {
    std::printf("%-6.2f", cfg.scale_factors[s]);
    for (const auto& cell : table.cells[s]) {
      if (cell.rmse)
        std::printf(" %14.3e", *cell.rmse);
      else
        std::printf(" %14s", "NA");
    }
    std::printf("\n");
  }
}
