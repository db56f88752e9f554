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

#ifndef LESIONDET_VOLUME_HPP_
#define LESIONDET_VOLUME_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lesiondet {

using Index3 = std::array<int64_t, 3>;
using Point3 = std::array<double, 3>;

// Tolerance (mm) under which spacing/origin components are considered equal.
inline constexpr double kGeometryTolerance = 1e-6;

// Voxel grid placement in physical space. Axis order is x, y, z; origin is
// the physical position of the center of voxel (0,0,0).
struct Geometry {
  Index3 dims{1, 1, 1};
  Point3 spacing{1.0, 1.0, 1.0};
  Point3 origin{0.0, 0.0, 0.0};

  // Throws kValidation when dims < 1, spacing <= 0 or anything is non-finite.
  void Validate() const;

  int64_t NumVoxels() const { return dims[0] * dims[1] * dims[2]; }

  // x-fastest linear index.
  int64_t Linear(const Index3& idx) const {
    return idx[0] + dims[0] * (idx[1] + dims[1] * idx[2]);
  }
  Index3 Unlinear(int64_t linear) const {
    return {linear % dims[0], (linear / dims[0]) % dims[1],
            linear / (dims[0] * dims[1])};
  }
  bool Contains(const Index3& idx) const {
    for (int a = 0; a < 3; ++a) {
      if (idx[a] < 0 || idx[a] >= dims[a]) return false;
    }
    return true;
  }

  bool operator==(const Geometry&) const = default;
};

// dims equal; spacing and origin componentwise within kGeometryTolerance.
bool Compatible(const Geometry& a, const Geometry& b);

Point3 VoxelToPhysical(const Geometry& g, const Index3& idx);
Point3 PhysicalToVoxel(const Geometry& g, const Point3& p);

enum class ElementKind { kUInt8, kInt16, kUInt16, kFloat32 };

std::size_t ElementSize(ElementKind kind);
// MetaImage element type names: MET_UCHAR, MET_SHORT, MET_USHORT, MET_FLOAT.
const char* MetElementName(ElementKind kind);

// A 3D scalar grid with geometry. The buffer is x-fastest.
class Volume {
 public:
  using Buffer = std::variant<std::vector<uint8_t>, std::vector<int16_t>,
                              std::vector<uint16_t>, std::vector<float>>;

  Volume() = default;
  // Zero-filled volume.
  Volume(const Geometry& geometry, ElementKind kind);
  // Takes ownership of `data`; throws kValidation on length mismatch.
  Volume(const Geometry& geometry, Buffer data);

  const Geometry& geometry() const { return geometry_; }
  ElementKind kind() const { return static_cast<ElementKind>(data_.index()); }
  int64_t size() const { return geometry_.NumVoxels(); }

  template <typename T>
  std::span<const T> values() const {
    return std::get<std::vector<T>>(data_);
  }
  template <typename T>
  std::span<T> mutable_values() {
    return std::get<std::vector<T>>(data_);
  }

  // Value at a linear index, converted to double.
  double At(int64_t linear) const;

  const Buffer& buffer() const { return data_; }
  std::span<const std::byte> bytes() const;

  // Same geometry and kind, bitwise-equal payload.
  bool operator==(const Volume& other) const;

 private:
  Geometry geometry_;
  Buffer data_ = std::vector<float>(1, 0.0f);
};

// A float-32 volume whose values all lie in [0,1]. Holds per-voxel lesion
// probabilities.
class ProbabilityMap {
 public:
  // Throws kValidation when `v` is not float-32 or a value is outside [0,1]
  // (NaN included).
  explicit ProbabilityMap(Volume v);

  const Volume& volume() const { return volume_; }
  const Geometry& geometry() const { return volume_.geometry(); }
  std::span<const float> values() const { return volume_.values<float>(); }

 private:
  Volume volume_;
};

// MetaImage (.mha) subset: uncompressed, ElementDataFile = LOCAL, identity
// orientation, little-endian payload.
Volume ReadMha(const std::string& path);
Volume ParseMha(std::span<const std::byte> file);
void WriteMha(const Volume& v, const std::string& path);
std::string SerializeMha(const Volume& v);

// Voxelwise mean. Output geometry is the first input's.
ProbabilityMap MeanVolumes(std::span<const ProbabilityMap> maps);

// Maximum voxel value.
double MaxValue(const Volume& v);

}  // namespace lesiondet

#endif  // LESIONDET_VOLUME_HPP_
