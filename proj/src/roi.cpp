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

#include "lesiondet/roi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "lesiondet/error.hpp"

namespace lesiondet {

namespace {

// Continuous voxel coordinates within this distance of an integer are
// treated as that integer, so exact voxel-center boxes do not pick up an
// extra slice from rounding noise.
constexpr double kSnap = 1e-6;

double Snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kSnap ? r : v;
}

}  // namespace

void CropBox::Validate() const {
  reference.Validate();
  for (int a = 0; a < 3; ++a) {
    if (!(0 <= lo[a] && lo[a] < hi[a] && hi[a] <= reference.dims[a])) {
      Fail(ErrorCode::kValidation, "crop box outside reference grid");
    }
  }
}

PhysicalBox MaskBoundingBox(const Volume& mask) {
  const Geometry& g = mask.geometry();
  Index3 lo{std::numeric_limits<int64_t>::max(),
            std::numeric_limits<int64_t>::max(),
            std::numeric_limits<int64_t>::max()};
  Index3 hi{-1, -1, -1};
  const int64_t n = mask.size();
  for (int64_t li = 0; li < n; ++li) {
    if (!(mask.At(li) > 0.0)) continue;
    const Index3 idx = g.Unlinear(li);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], idx[a]);
      hi[a] = std::max(hi[a], idx[a]);
    }
  }
  if (hi[0] < 0) Fail(ErrorCode::kEmpty, "no foreground");
  return {VoxelToPhysical(g, lo), VoxelToPhysical(g, hi)};
}

CropBox ComputeCropBox(const PhysicalBox& box, const Geometry& target,
                       const MarginMm& margin) {
  target.Validate();
  const Point3 m{margin.x, margin.y, margin.z};
  for (int a = 0; a < 3; ++a) {
    if (!(m[a] >= 0.0) || !std::isfinite(m[a])) {
      Fail(ErrorCode::kInvalidArgument, "margin must be finite and >= 0");
    }
    if (!(box.lo[a] <= box.hi[a])) {
      Fail(ErrorCode::kInvalidArgument, "physical box has lo > hi");
    }
  }
  Point3 plo, phi;
  for (int a = 0; a < 3; ++a) {
    plo[a] = box.lo[a] - m[a];
    phi[a] = box.hi[a] + m[a];
  }
  const Point3 vlo = PhysicalToVoxel(target, plo);
  const Point3 vhi = PhysicalToVoxel(target, phi);
  CropBox out;
  out.reference = target;
  for (int a = 0; a < 3; ++a) {
    const double lo = std::floor(Snap(vlo[a]));
    const double hi = std::ceil(Snap(vhi[a])) + 1.0;
    const double dim = static_cast<double>(target.dims[a]);
    out.lo[a] = static_cast<int64_t>(std::clamp(lo, 0.0, dim));
    out.hi[a] = static_cast<int64_t>(std::clamp(hi, 0.0, dim));
    if (out.lo[a] >= out.hi[a]) {
      Fail(ErrorCode::kEmpty, "crop box is empty: mask lies outside the target grid");
    }
  }
  return out;
}

Volume Crop(const Volume& v, const CropBox& box) {
  box.Validate();
  if (!Compatible(v.geometry(), box.reference)) {
    Fail(ErrorCode::kGeometryMismatch, "crop box reference does not match the volume geometry");
  }
  const Geometry& src = v.geometry();
  Geometry dst;
  dst.dims = box.Extent();
  dst.spacing = src.spacing;
  dst.origin = VoxelToPhysical(src, box.lo);
  return std::visit(
      [&](const auto& values) {
        using T = typename std::decay_t<decltype(values)>::value_type;
        std::vector<T> out;
        out.reserve(static_cast<std::size_t>(dst.NumVoxels()));
        for (int64_t z = box.lo[2]; z < box.hi[2]; ++z) {
          for (int64_t y = box.lo[1]; y < box.hi[1]; ++y) {
            const int64_t row = src.Linear({box.lo[0], y, z});
            out.insert(out.end(), values.begin() + row,
                       values.begin() + row + dst.dims[0]);
          }
        }
        return Volume(dst, std::move(out));
      },
      v.buffer());
}

Volume Uncrop(const Volume& det, const CropBox& box) {
  box.Validate();
  const Geometry& ref = box.reference;
  if (det.geometry().dims != box.Extent()) {
    Fail(ErrorCode::kGeometryMismatch, "uncrop: volume dims do not match the crop box");
  }
  for (int a = 0; a < 3; ++a) {
    if (std::abs(det.geometry().spacing[a] - ref.spacing[a]) > kGeometryTolerance) {
      Fail(ErrorCode::kGeometryMismatch, "uncrop: spacing does not match the reference");
    }
  }
  return std::visit(
      [&](const auto& values) {
        using T = typename std::decay_t<decltype(values)>::value_type;
        std::vector<T> out(static_cast<std::size_t>(ref.NumVoxels()), T{0});
        const int64_t nx = box.hi[0] - box.lo[0];
        int64_t src = 0;
        for (int64_t z = box.lo[2]; z < box.hi[2]; ++z) {
          for (int64_t y = box.lo[1]; y < box.hi[1]; ++y) {
            const int64_t row = ref.Linear({box.lo[0], y, z});
            std::copy(values.begin() + src, values.begin() + src + nx,
                      out.begin() + row);
            src += nx;
          }
        }
        return Volume(ref, std::move(out));
      },
      det.buffer());
}

std::string CropBoxToJson(const CropBox& box) {
  nlohmann::ordered_json j;
  j["lo"] = box.lo;
  j["hi"] = box.hi;
  j["reference"]["dims"] = box.reference.dims;
  j["reference"]["spacing"] = box.reference.spacing;
  j["reference"]["origin"] = box.reference.origin;
  return j.dump(2) + "\n";
}

CropBox CropBoxFromJson(const std::string& text) {
  CropBox box;
  try {
    const auto j = nlohmann::json::parse(text);
    box.lo = j.at("lo").get<Index3>();
    box.hi = j.at("hi").get<Index3>();
    const auto& r = j.at("reference");
    box.reference.dims = r.at("dims").get<Index3>();
    box.reference.spacing = r.at("spacing").get<Point3>();
    box.reference.origin = r.at("origin").get<Point3>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformed, std::string("crop box JSON: ") + e.what());
  }
  box.Validate();
  return box;
}

}  // namespace lesiondet
