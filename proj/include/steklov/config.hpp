#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace steklov {

class ConfigError : public std::invalid_argument
{
 public:
   using std::invalid_argument::invalid_argument;
};

/// Settings of one CLI invocation. Every field has a key that is accepted
/// both as a `--key` flag and in `key = value` config files.
struct RunConfig
{
   std::string           command;
   std::string           domain;              // square | lshape | disk | cube | meshfile
   std::string           mesh;                // path, for domain = meshfile
   std::vector<int>      levels;              // --n
   int                   degree = 1;          // --k
   double                lambda = 1.0;
   double                mu = 1.0;
   double                p = 1.0;
   std::vector<double>   matrix;              // --M, row-major d x d; empty = scalar p
   int                   n_eigs = 7;
   double                tol = 1e-10;
   std::uint64_t         seed = 0x5EED;
   std::optional<int>    reference_level;
   int                   reference_degree = 1;
   std::optional<double> theta_deg;
   std::string           format = "text";     // text | json
   std::string           output;              // result file or report directory

   bool operator==(const RunConfig&) const = default;
};

/// Keys in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual value. Unknown keys and malformed values
/// throw ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
RunConfig parse_config(const std::string& text, RunConfig base = {});

/// Normalized `key = value` listing of every field. Parsing it back yields
/// an equal config.
std::string canonical_config(const RunConfig& cfg);

} // namespace steklov
