#include "tpg/grad_check.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tpg {

double finite_diff_check(ParamStore& store, const std::function<double()>& eval, double epsilon,
                         SeededRng& rng, int coords_per_block) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw std::invalid_argument("finite_diff_check: epsilon outside [1e-7, 1e-3]");
  }
  const double f0 = eval();
  if (eval() != f0) {
    throw std::runtime_error("finite_diff_check: evaluation is not deterministic");
  }

  double worst = 0.0;
  for (BlockId id = 0; id < store.block_count(); ++id) {
    ParamBlock& blk = store.block(id);
    const int n = blk.size();
    std::vector<int> coords;
    if (n <= coords_per_block) {
      for (int i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int k = 0; k < coords_per_block; ++k) coords.push_back(rng.uniform_int(n));
    }
    for (int c : coords) {
      const double saved = blk.value[static_cast<size_t>(c)];
      blk.value[static_cast<size_t>(c)] = saved + epsilon;
      const double fp = eval();
      blk.value[static_cast<size_t>(c)] = saved - epsilon;
      const double fm = eval();
      blk.value[static_cast<size_t>(c)] = saved;
      const double central = (fp - fm) / (2.0 * epsilon);
      const double analytic = blk.grad[static_cast<size_t>(c)];
      const double rel = std::abs(analytic - central) / std::max(1e-8, std::abs(central));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace tpg
