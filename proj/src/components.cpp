#include "plotdigit/components.hpp"

#include <algorithm>

namespace plotdigit {

ComponentLabels label_components(const Mask& mask) {
  const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
  ComponentLabels out{Plane<int>::Constant(h, w, -1), {}};
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x) || out.labels(y, x) >= 0) continue;
      const int id = static_cast<int>(out.components.size());
      Component c{{x, y, x + 1, y + 1}, 0};
      stack.assign(1, {x, y});
      out.labels(y, x) = id;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++c.area;
        c.bbox.x0 = std::min(c.bbox.x0, cx);
        c.bbox.y0 = std::min(c.bbox.y0, cy);
        c.bbox.x1 = std::max(c.bbox.x1, cx + 1);
        c.bbox.y1 = std::max(c.bbox.y1, cy + 1);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!mask(ny, nx) || out.labels(ny, nx) >= 0) continue;
            out.labels(ny, nx) = id;
            stack.emplace_back(nx, ny);
          }
      }
      out.components.push_back(c);
    }
  return out;
}

}  // namespace plotdigit
