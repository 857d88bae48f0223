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

#ifndef DML_CONFIG_HPP_
#define DML_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "dml/data.hpp"
#include "dml/trainer.hpp"

namespace dml {

using ConfigValues = std::map<std::string, std::string>;

// `key=value` lines; `#` starts a comment.
ConfigValues read_config_file(const std::filesystem::path& file);
ConfigValues parse_config(const std::string& text, const std::string& source = "<config>");

// Keys without a matching field raise ValidationError.
void apply_config(const ConfigValues& values, TrainConfig& train, SyntheticConfig& synth);

std::string describe(const TrainConfig& cfg);

}  // namespace dml

#endif  // DML_CONFIG_HPP_
