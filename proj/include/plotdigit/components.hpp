#pragma once

#include <vector>

#include "plotdigit/geometry.hpp"
#include "plotdigit/raster.hpp"

namespace plotdigit {

struct Component {
  BBox bbox;  ///< half-open
  int area = 0;
};

struct ComponentLabels {
  Plane<int> labels;  ///< -1 for background, else index into `components`
  std::vector<Component> components;
};

/// 8-connected components of the nonzero pixels, labelled in raster order.
ComponentLabels label_components(const Mask& mask);

}  // namespace plotdigit
