#ifndef VLAB_CLI_HPP
#define VLAB_CLI_HPP

// Command-line front end: configuration, dispatch and report emission.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vlab/catalog.hpp"
#include "vlab/identities.hpp"

namespace vlab {

struct RunConfig {
  std::string preset;                   // empty when a custom series is given
  PresetParams params;
  std::optional<nlohmann::json> custom; // inline series descriptor
  IdentityTag identity = IdentityTag::modular;
  std::vector<real> xs;
  std::vector<cplx> ss;
  real rho = 0.0;
  std::optional<real> a;
  real tol = 1e-8;
  std::string format = "json";          // json or csv
  std::string path;                     // empty: standard output

  void validate() const;
};

// Exit codes of the command-line tool.
inline constexpr int exit_pass = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_identity_failure = 2;

[[nodiscard]] cplx parse_complex(const std::string& text);
[[nodiscard]] std::vector<std::string> split_list(const std::string& text);

// Functional-equation data from an inline descriptor (see README for the fields).
[[nodiscard]] FunctionalEquationData custom_series(const nlohmann::json& j);

// Config document: {"series": {"preset": ..., "params": {...}} | {"custom": {...}},
//                   "identity": ..., "points": [...], "rho", "a", "tol", "output": {"format", "path"}}
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& j);

// Runs every point, writes the reports, returns an exit code.
int run(const RunConfig& cfg, std::ostream& out);

// Whole command line; errors are reported on err and give exit_error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vlab

#endif
