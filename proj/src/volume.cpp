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

#include "lesiondet/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <string_view>

#include "io_util.hpp"
#include "lesiondet/error.hpp"

namespace lesiondet {

void Geometry::Validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) {
      Fail(ErrorCode::kValidation, "geometry dims must be >= 1");
    }
    if (!std::isfinite(spacing[a]) || !(spacing[a] > 0.0)) {
      Fail(ErrorCode::kValidation, "geometry spacing must be finite and > 0");
    }
    if (!std::isfinite(origin[a])) {
      Fail(ErrorCode::kValidation, "geometry origin must be finite");
    }
  }
}

bool Compatible(const Geometry& a, const Geometry& b) {
  for (int i = 0; i < 3; ++i) {
    if (a.dims[i] != b.dims[i]) return false;
    if (std::abs(a.spacing[i] - b.spacing[i]) > kGeometryTolerance) return false;
    if (std::abs(a.origin[i] - b.origin[i]) > kGeometryTolerance) return false;
  }
  return true;
}

Point3 VoxelToPhysical(const Geometry& g, const Index3& idx) {
  Point3 p;
  for (int a = 0; a < 3; ++a) {
    p[a] = g.origin[a] + static_cast<double>(idx[a]) * g.spacing[a];
  }
  return p;
}

Point3 PhysicalToVoxel(const Geometry& g, const Point3& p) {
  Point3 c;
  for (int a = 0; a < 3; ++a) c[a] = (p[a] - g.origin[a]) / g.spacing[a];
  return c;
}

std::size_t ElementSize(ElementKind kind) {
  switch (kind) {
    case ElementKind::kUInt8: return 1;
    case ElementKind::kInt16: return 2;
    case ElementKind::kUInt16: return 2;
    case ElementKind::kFloat32: return 4;
  }
  return 0;
}

const char* MetElementName(ElementKind kind) {
  switch (kind) {
    case ElementKind::kUInt8: return "MET_UCHAR";
    case ElementKind::kInt16: return "MET_SHORT";
    case ElementKind::kUInt16: return "MET_USHORT";
    case ElementKind::kFloat32: return "MET_FLOAT";
  }
  return "";
}

namespace {

Volume::Buffer MakeBuffer(ElementKind kind, std::size_t n) {
  switch (kind) {
    case ElementKind::kUInt8: return std::vector<uint8_t>(n);
    case ElementKind::kInt16: return std::vector<int16_t>(n);
    case ElementKind::kUInt16: return std::vector<uint16_t>(n);
    case ElementKind::kFloat32: return std::vector<float>(n);
  }
  return std::vector<float>(n);
}

std::size_t BufferLength(const Volume::Buffer& b) {
  return std::visit([](const auto& v) { return v.size(); }, b);
}

}  // namespace

Volume::Volume(const Geometry& geometry, ElementKind kind)
    : geometry_(geometry) {
  geometry_.Validate();
  data_ = MakeBuffer(kind, static_cast<std::size_t>(geometry_.NumVoxels()));
}

Volume::Volume(const Geometry& geometry, Buffer data)
    : geometry_(geometry), data_(std::move(data)) {
  geometry_.Validate();
  if (BufferLength(data_) != static_cast<std::size_t>(geometry_.NumVoxels())) {
    Fail(ErrorCode::kValidation, "volume buffer length does not match dims");
  }
}

double Volume::At(int64_t linear) const {
  return std::visit(
      [linear](const auto& v) { return static_cast<double>(v[linear]); },
      data_);
}

std::span<const std::byte> Volume::bytes() const {
  return std::visit(
      [](const auto& v) { return std::as_bytes(std::span(v)); }, data_);
}

bool Volume::operator==(const Volume& other) const {
  if (!(geometry_ == other.geometry_) || kind() != other.kind()) return false;
  const auto a = bytes();
  const auto b = other.bytes();
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size()) == 0;
}

ProbabilityMap::ProbabilityMap(Volume v) : volume_(std::move(v)) {
  if (volume_.kind() != ElementKind::kFloat32) {
    Fail(ErrorCode::kValidation, "probability map must be MET_FLOAT");
  }
  for (float x : volume_.values<float>()) {
    if (!(x >= 0.0f && x <= 1.0f)) {
      Fail(ErrorCode::kValidation, "probability map value outside [0,1]");
    }
  }
}

// --- MetaImage ---------------------------------------------------------------

namespace {

constexpr std::size_t kMaxHeaderBytes = 1 << 16;

template <typename T>
void CopyLittleEndian(std::span<const std::byte> src, std::vector<T>& dst) {
  std::memcpy(dst.data(), src.data(), dst.size() * sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    for (T& value : dst) {
      auto* b = reinterpret_cast<unsigned char*>(&value);
      std::reverse(b, b + sizeof(T));
    }
  }
}

[[noreturn]] void Malformed(const std::string& what) {
  Fail(ErrorCode::kMalformed, "malformed MetaImage header: " + what);
}

[[noreturn]] void Unsupported(const std::string& what) {
  Fail(ErrorCode::kUnsupported, "unsupported: " + what);
}

bool ParseBool(std::string_view key, std::string_view value) {
  std::string lower(value);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "true") return true;
  if (lower == "false") return false;
  Malformed(std::string(key) + " must be True or False");
}

std::vector<double> ParseNumbers(std::string_view key, std::string_view value,
                                 std::size_t expected) {
  std::vector<double> out;
  for (std::string_view tok : io::Split(value, ' ')) {
    if (tok.empty()) continue;
    double d = 0.0;
    if (!io::ParseDouble(tok, &d) || !std::isfinite(d)) {
      Malformed(std::string(key) + " has a non-numeric value");
    }
    out.push_back(d);
  }
  if (out.size() != expected) {
    Malformed(std::string(key) + " expects " + std::to_string(expected) +
              " values");
  }
  return out;
}

std::string JoinGeneral(const Point3& p) {
  return io::FormatGeneral(p[0], 9) + " " + io::FormatGeneral(p[1], 9) + " " +
         io::FormatGeneral(p[2], 9);
}

}  // namespace

Volume ParseMha(std::span<const std::byte> file) {
  std::map<std::string, std::string, std::less<>> header;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_data_file = false;
  while (!saw_data_file) {
    if (pos >= file.size()) Malformed("missing ElementDataFile");
    if (pos > kMaxHeaderBytes) Malformed("header too long");
    std::size_t end = pos;
    while (end < file.size() && file[end] != std::byte{'\n'}) ++end;
    if (end == file.size()) Malformed("unterminated header line");
    std::string_view line(reinterpret_cast<const char*>(file.data()) + pos,
                          end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (io::Trim(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      Malformed("line " + std::to_string(line_no) + " has no '='");
    }
    const std::string key(io::Trim(line.substr(0, eq)));
    const std::string value(io::Trim(line.substr(eq + 1)));
    if (key.empty()) Malformed("line " + std::to_string(line_no) + " has no key");
    if (!header.emplace(key, value).second) Malformed("duplicate key " + key);
    if (key == "ElementDataFile") saw_data_file = true;
  }

  const auto find = [&](std::initializer_list<std::string_view> names)
      -> const std::string* {
    const std::string* hit = nullptr;
    for (std::string_view n : names) {
      auto it = header.find(n);
      if (it == header.end()) continue;
      if (hit != nullptr) Malformed("conflicting aliases for " + std::string(n));
      hit = &it->second;
    }
    return hit;
  };

  if (const auto* v = find({"ObjectType"}); v && *v != "Image") {
    Unsupported("ObjectType " + *v);
  }
  const auto* ndims = find({"NDims"});
  if (!ndims) Malformed("missing NDims");
  {
    long long n = 0;
    if (!io::ParseInt64(*ndims, &n)) Malformed("NDims is not an integer");
    if (n != 3) Unsupported("NDims " + *ndims);
  }
  if (const auto* v = find({"BinaryData"}); v && !ParseBool("BinaryData", *v)) {
    Unsupported("ASCII payload");
  }
  if (const auto* v = find({"BinaryDataByteOrderMSB", "ElementByteOrderMSB"});
      v && ParseBool("BinaryDataByteOrderMSB", *v)) {
    Unsupported("big-endian payload");
  }
  if (const auto* v = find({"CompressedData"});
      v && ParseBool("CompressedData", *v)) {
    Unsupported("compressed data");
  }
  if (const auto* v = find({"TransformMatrix", "Rotation", "Orientation"})) {
    const auto m = ParseNumbers("TransformMatrix", *v, 9);
    for (int i = 0; i < 9; ++i) {
      const double expected = (i % 4 == 0) ? 1.0 : 0.0;
      if (std::abs(m[i] - expected) > 1e-6) {
        Unsupported("non-identity TransformMatrix");
      }
    }
  }
  if (const auto* v = find({"ElementNumberOfChannels"}); v && *v != "1") {
    Unsupported("ElementNumberOfChannels " + *v);
  }

  Geometry g;
  const auto* dim_size = find({"DimSize"});
  if (!dim_size) Malformed("missing DimSize");
  {
    const auto d = ParseNumbers("DimSize", *dim_size, 3);
    for (int a = 0; a < 3; ++a) {
      if (d[a] < 1 || d[a] != std::floor(d[a]) || d[a] > 1e9) {
        Malformed("DimSize entries must be positive integers");
      }
      g.dims[a] = static_cast<int64_t>(d[a]);
    }
  }
  if (const auto* v = find({"ElementSpacing"})) {
    const auto s = ParseNumbers("ElementSpacing", *v, 3);
    for (int a = 0; a < 3; ++a) {
      if (!(s[a] > 0.0)) Malformed("ElementSpacing entries must be > 0");
      g.spacing[a] = s[a];
    }
  }
  if (const auto* v = find({"Offset", "Position", "Origin"})) {
    const auto o = ParseNumbers("Offset", *v, 3);
    for (int a = 0; a < 3; ++a) g.origin[a] = o[a];
  }

  const auto* type = find({"ElementType"});
  if (!type) Malformed("missing ElementType");
  ElementKind kind;
  if (*type == "MET_UCHAR") {
    kind = ElementKind::kUInt8;
  } else if (*type == "MET_SHORT") {
    kind = ElementKind::kInt16;
  } else if (*type == "MET_USHORT") {
    kind = ElementKind::kUInt16;
  } else if (*type == "MET_FLOAT") {
    kind = ElementKind::kFloat32;
  } else {
    Unsupported("ElementType " + *type);
  }
  if (header.at("ElementDataFile") != "LOCAL") {
    Unsupported("ElementDataFile " + header.at("ElementDataFile"));
  }

  const std::size_t n = static_cast<std::size_t>(g.NumVoxels());
  const std::size_t expected = n * ElementSize(kind);
  const std::size_t found = file.size() - pos;
  if (found != expected) {
    Fail(ErrorCode::kPayloadMismatch,
         "payload length mismatch: expected " + std::to_string(expected) +
             " bytes, found " + std::to_string(found));
  }
  auto payload = file.subspan(pos);
  Volume::Buffer buffer = MakeBuffer(kind, n);
  std::visit([&](auto& vec) { CopyLittleEndian(payload, vec); }, buffer);
  return Volume(g, std::move(buffer));
}

Volume ReadMha(const std::string& path) {
  const auto bytes = io::ReadFileBytes(path);
  try {
    return ParseMha(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string SerializeMha(const Volume& v) {
  const Geometry& g = v.geometry();
  std::string out;
  out += "ObjectType = Image\n";
  out += "NDims = 3\n";
  out += "BinaryData = True\n";
  out += "BinaryDataByteOrderMSB = False\n";
  out += "CompressedData = False\n";
  out += "TransformMatrix = 1 0 0 0 1 0 0 0 1\n";
  out += "Offset = " + JoinGeneral(g.origin) + "\n";
  out += "ElementSpacing = " + JoinGeneral(g.spacing) + "\n";
  out += "DimSize = " + std::to_string(g.dims[0]) + " " +
         std::to_string(g.dims[1]) + " " + std::to_string(g.dims[2]) + "\n";
  out += std::string("ElementType = ") + MetElementName(v.kind()) + "\n";
  out += "ElementDataFile = LOCAL\n";
  const auto payload = v.bytes();
  const std::size_t header_size = out.size();
  out.resize(header_size + payload.size());
  std::memcpy(out.data() + header_size, payload.data(), payload.size());
  if constexpr (std::endian::native == std::endian::big) {
    const std::size_t width = ElementSize(v.kind());
    for (std::size_t i = header_size; width > 1 && i < out.size(); i += width) {
      std::reverse(out.begin() + i, out.begin() + i + width);
    }
  }
  return out;
}

void WriteMha(const Volume& v, const std::string& path) {
  io::WriteFileAtomic(path, SerializeMha(v));
}

ProbabilityMap MeanVolumes(std::span<const ProbabilityMap> maps) {
  if (maps.empty()) Fail(ErrorCode::kEmpty, "mean of an empty list of volumes");
  const Geometry& g = maps.front().geometry();
  for (const auto& m : maps) {
    if (!Compatible(g, m.geometry())) {
      Fail(ErrorCode::kGeometryMismatch, "ensemble inputs have incompatible geometry");
    }
  }
  const std::size_t n = static_cast<std::size_t>(g.NumVoxels());
  std::vector<double> sum(n, 0.0);
  for (const auto& m : maps) {
    const auto values = m.values();
    for (std::size_t i = 0; i < n; ++i) sum[i] += values[i];
  }
  const double count = static_cast<double>(maps.size());
  std::vector<float> mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    mean[i] = static_cast<float>(sum[i] / count);
  }
  return ProbabilityMap(Volume(g, std::move(mean)));
}

double MaxValue(const Volume& v) {
  return std::visit(
      [](const auto& vec) {
        return static_cast<double>(*std::max_element(vec.begin(), vec.end()));
      },
      v.buffer());
}

}  // namespace lesiondet
