// Copyright 2026 The dml-xdomain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DML_CSV_HPP_
#define DML_CSV_HPP_

// Minimal comma-separated text helpers. No quoting: identifiers and numbers
// only.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace dml::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');

// Strict parsers; throw ParseError(file, line, ...) on malformed input.
double parse_double(std::string_view text, const std::string& file, std::size_t line);
std::int64_t parse_int(std::string_view text, const std::string& file, std::size_t line);

// Shortest text that parses back to the same double.
std::string format_double(double v);

// Reads all non-empty lines (CR stripped). Throws IoError if missing.
std::vector<std::string> read_lines(const std::filesystem::path& file);

std::ofstream open_output(const std::filesystem::path& file, bool append = false);

}  // namespace dml::csv

#endif  // DML_CSV_HPP_
