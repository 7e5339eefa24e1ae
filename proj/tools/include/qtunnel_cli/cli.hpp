#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace qtunnel::cli {

using json = nlohmann::json;

enum class ValueType { Number, Integer, Boolean, Text };

struct KeySpec {
  std::string name;
  ValueType type = ValueType::Number;
  json default_value;
  std::string help;
};

// Commands: double-well, washboard, charge, flux, gl-cpr, wkb, oracle, sweep.
const std::vector<std::string>& commands();
const std::vector<KeySpec>& schema(const std::string& command);

struct RunConfig {
  std::string command;
  json params = json::object();  // resolved, schema-validated
  std::string out_dir = ".";
  std::set<std::string> formats{"json", "csv"};
};

// Merge defaults, a flat JSON document and overrides (in that order);
// unknown keys raise ValidationError.
RunConfig resolve(const std::string& command, const json& file_values, const json& overrides);

struct RunOutput {
  json result;
  std::map<std::string, std::string> csv;  // file name -> contents
};

RunOutput execute(const RunConfig& config);

// FNV-1a hash of the canonical resolved config.
std::string config_hash(const RunConfig& config);

// Writes the requested formats into config.out_dir.
void write_outputs(const RunConfig& config, const RunOutput& output);

// Full command-line entry point; returns the process exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qtunnel::cli
