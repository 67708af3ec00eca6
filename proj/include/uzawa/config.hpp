#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "uzawa/uzawa.hpp"

namespace uzawa {

/// Reads "key = value" lines into a config. Blank lines and text after '#'
/// are ignored; keys are the AlgorithmConfig field names. Unknown or
/// repeated keys and malformed values throw ValidationError with the line
/// number. The result is not validated.
AlgorithmConfig parse_config(std::istream& is, AlgorithmConfig base = {});
AlgorithmConfig load_config(const std::string& path);

/// Every field as (key, value text), in declaration order.
std::vector<std::pair<std::string, std::string>> config_entries(const AlgorithmConfig& c);
/// Writes a file parse_config reads back to the same config.
void write_config(std::ostream& os, const AlgorithmConfig& c);

}  // namespace uzawa
