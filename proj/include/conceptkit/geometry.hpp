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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "conceptkit/jsonl.hpp"

namespace conceptkit {

// Axis-aligned box in absolute pixel coordinates, x2 > x1 and y2 > y1.
struct BoundingBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const;

  bool operator==(const BoundingBox&) const = default;
};

// Throws ValidationError unless the box is finite with positive extent.
BoundingBox make_box(double x1, double y1, double x2, double y2);

json to_json(const BoundingBox& b);
BoundingBox box_from_json(const json& j);  // [x1, y1, x2, y2]

// Intersection over union in [0, 1]; 0 for disjoint or edge-touching boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

// Greedy suppression in descending score order (equal scores: lower index
// first). A box is dropped if its IoU with an already kept box exceeds
// `threshold`. Returns kept indices in the order they were kept.
std::vector<std::size_t> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                             double threshold);

}  // namespace conceptkit
