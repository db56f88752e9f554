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

#ifndef LESIONDET_NEIGHBORHOOD_HPP_
#define LESIONDET_NEIGHBORHOOD_HPP_

#include <vector>

#include "lesiondet/volume.hpp"

namespace lesiondet {

// Face (6), face+edge (18) or face+edge+corner (26) adjacency.
enum class Connectivity { k6 = 6, k18 = 18, k26 = 26 };

// Throws kInvalidArgument unless n is 6, 18 or 26.
Connectivity ConnectivityFromInt(int n);

// Offsets of the neighbors of the origin voxel under `c`, in a fixed order.
std::vector<Index3> NeighborOffsets(Connectivity c);

}  // namespace lesiondet

#endif  // LESIONDET_NEIGHBORHOOD_HPP_
