/*
 * Copyright 2026 The lesiondet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LESIONDET_ROI_HPP_
#define LESIONDET_ROI_HPP_

#include <string>
#include <utility>

#include "lesiondet/volume.hpp"

namespace lesiondet {

// Physical margin (mm) added on each side of the mask box, per axis.
struct MarginMm {
  double x = 100.0;
  double y = 50.0;
  double z = 15.0;
};

// Half-open voxel box [lo, hi) in `reference`.
struct CropBox {
  Index3 lo{0, 0, 0};
  Index3 hi{1, 1, 1};
  Geometry reference;

  Index3 Extent() const { return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}; }
  // Throws kValidation unless 0 <= lo < hi <= reference.dims.
  void Validate() const;
  bool operator==(const CropBox&) const = default;
};

struct PhysicalBox {
  Point3 lo;
  Point3 hi;
};

// Box spanned by the centers of voxels with value > 0, in the mask's own
// physical space. Throws kEmpty when there is no foreground.
PhysicalBox MaskBoundingBox(const Volume& mask);

// Expands `box` by `margin` on every side and converts it to voxel indices of
// `target` (floor for lo, ceil + 1 for hi), clamped to the target grid.
// Throws kEmpty when nothing of the expanded box lies on the grid.
CropBox ComputeCropBox(const PhysicalBox& box, const Geometry& target,
                       const MarginMm& margin);

Volume Crop(const Volume& v, const CropBox& box);

// Pastes `det` into a zero volume with the box's reference geometry.
Volume Uncrop(const Volume& det, const CropBox& box);

// {"lo":[...], "hi":[...], "reference":{"dims","spacing","origin"}}
std::string CropBoxToJson(const CropBox& box);
CropBox CropBoxFromJson(const std::string& text);

}  // namespace lesiondet

#endif  // LESIONDET_ROI_HPP_
