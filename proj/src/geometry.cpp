/* Copyright 2026 The conceptkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "conceptkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conceptkit/error.hpp"

namespace conceptkit {

bool BoundingBox::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) && x2 > x1 &&
         y2 > y1;
}

BoundingBox make_box(double x1, double y1, double x2, double y2) {
  BoundingBox b{x1, y1, x2, y2};
  if (!b.valid())
    throw ValidationError("invalid box [" + std::to_string(x1) + ", " + std::to_string(y1) + ", " +
                          std::to_string(x2) + ", " + std::to_string(y2) + "]");
  return b;
}

json to_json(const BoundingBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("box must be [x1, y1, x2, y2]");
  return make_box(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

std::vector<std::size_t> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                             double threshold) {
  if (boxes.size() != scores.size()) throw ValidationError("nms: boxes and scores differ in length");
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<bool> suppressed(boxes.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!suppressed[j] && iou(boxes[i], boxes[j]) > threshold) suppressed[j] = true;
    }
  }
  return kept;
}

}  // namespace conceptkit
