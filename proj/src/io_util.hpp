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

#ifndef LESIONDET_SRC_IO_UTIL_HPP_
#define LESIONDET_SRC_IO_UTIL_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lesiondet::io {

std::vector<std::byte> ReadFileBytes(const std::string& path);
std::string ReadFileText(const std::string& path);

// Writes to a temporary sibling and renames over `path`, so readers never
// observe a partial file.
void WriteFileAtomic(const std::string& path, std::string_view contents);

// Locale-independent "%.<precision>g".
std::string FormatGeneral(double value, int precision);
// Locale-independent "%.<decimals>f".
std::string FormatFixed(double value, int decimals);

// Locale-independent strict parsers; the whole string must be consumed.
bool ParseDouble(std::string_view text, double* out);
bool ParseInt64(std::string_view text, long long* out);

std::string_view Trim(std::string_view s);
std::vector<std::string_view> Split(std::string_view s, char sep);

}  // namespace lesiondet::io

#endif  // LESIONDET_SRC_IO_UTIL_HPP_
