#pragma once

#include <cstddef>

namespace ogf {

struct LinearTerm {
  std::size_t var;
  double coef;
};

}  // namespace ogf
