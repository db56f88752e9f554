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

#include "lesiondet/neighborhood.hpp"

#include <cstdlib>
#include <string>

#include "lesiondet/error.hpp"

namespace lesiondet {

Connectivity ConnectivityFromInt(int n) {
  switch (n) {
    case 6: return Connectivity::k6;
    case 18: return Connectivity::k18;
    case 26: return Connectivity::k26;
    default:
      Fail(ErrorCode::kInvalidArgument,
           "connectivity must be 6, 18 or 26, got " + std::to_string(n));
  }
}

std::vector<Index3> NeighborOffsets(Connectivity c) {
  // Manhattan distance of an offset: 1 = face, 2 = edge, 3 = corner.
  const int max_manhattan = c == Connectivity::k6 ? 1 : c == Connectivity::k18 ? 2 : 3;
  std::vector<Index3> offsets;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int m = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (m == 0 || m > max_manhattan) continue;
        offsets.push_back({dx, dy, dz});
      }
    }
  }
  return offsets;
}

}  // namespace lesiondet
