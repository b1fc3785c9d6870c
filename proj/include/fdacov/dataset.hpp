#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fdacov {

// One sparsely observed curve: paired observation times and noisy values.
struct Curve {
  std::string id;
  std::vector<double> t;
  std::vector<double> y;

  std::size_t size() const { return t.size(); }
};

// Ragged collection of curves on [0,1].
struct FunctionalDataset {
  std::vector<Curve> curves;

  std::size_t n_curves() const { return curves.size(); }
  std::size_t n_observations() const {
    std::size_t n = 0;
    for (const auto& c : curves) n += c.size();
    return n;
  }
};

}  // namespace fdacov
