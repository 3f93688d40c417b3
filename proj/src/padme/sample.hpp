#pragma once

#include <cstddef>
#include <vector>

namespace padme {

// One (compound, protein) pair with a value and 0/1 mask per task.
struct PairSample {
  std::size_t compound = 0;
  std::size_t protein = 0;
  std::vector<double> target;
  std::vector<double> mask;
};

struct PairRef {
  std::size_t compound = 0;
  std::size_t protein = 0;
};

}  // namespace padme
