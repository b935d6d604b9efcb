// Copyright 2026 The ctxroute Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace ctxroute::io {

std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// Creates parent directories as needed.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Two-space indented dump with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// Shortest decimal text that round-trips the double ("%.17g" trimmed).
std::string format_real(double value);

/// Quotes a CSV field when it holds a comma, quote or line break.
std::string csv_field(const std::string& text);

}  // namespace ctxroute::io
