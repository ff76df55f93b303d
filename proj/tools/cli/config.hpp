#pragma once

// Run configuration: JSON parsing with full error collection, and a
// canonical serializer (sorted keys, %.17g numbers) used for round trips
// and content hashing.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cfrelax/convex.hpp"
#include "cfrelax/error.hpp"
#include "cfrelax/initial_data.hpp"
#include "cfrelax/solver.hpp"
#include "cfrelax/system.hpp"
#include "cfrelax/verify.hpp"

namespace cfrelax::cli {

namespace check {
struct Energy {};
/// Every sampled kappa against three cones and `bumps` seeded bumps.
struct Entropy {
  int bumps = 5;
  double budget_constant = kEntropyBudgetConstant;
};
/// Pair (W0, W0 shifted by `shift` cells along x1).
struct Contraction {
  int shift = 1;
  std::vector<double> radii{1.0};
  std::optional<double> local_tol;  ///< defaults to 5h
};
struct FiniteSpeed {
  std::optional<double> r0;  ///< defaults to the support radius of W0
};
struct EpsilonStudy {
  std::vector<double> epsilons;
  double omega = 1.0;
};
struct EtaStudy {
  std::vector<double> etas;
  double omega = 1.0;
  double final_ratio = 0.5;
};
struct DataStudy {
  std::vector<double> widths;
};
}  // namespace check

using CheckSpec = std::variant<check::Energy, check::Entropy, check::Contraction, check::FiniteSpeed,
                               check::EpsilonStudy, check::EtaStudy, check::DataStudy>;

std::string check_name(const CheckSpec& spec);
bool is_study(const CheckSpec& spec);

struct GridSpec {
  double half_width = 1.0;
  int cells = 64;
};

struct RunConfig {
  ModelSpec model;
  /// Explicit constraint; absent when the model defines its own.
  std::optional<ConvexSet> constraint;
  GridSpec grid;
  SolverConfig solver;
  InitialPreset initial;
  std::vector<CheckSpec> verify;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

/// Thrown by parse_config when the document is well-formed JSON but invalid.
/// Every problem is listed, each prefixed with its field path.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Throws Error(ParseError) with line and column on malformed JSON and
/// ConfigError on invalid content.
RunConfig parse_config(const std::string& text);

/// Canonical text: sorted keys, two-space indent, %.17g floats, LF, trailing newline.
std::string to_canonical_json(const RunConfig& cfg);

/// Canonical text of any JSON value, in the same format.
std::string canonical_dump(const nlohmann::json& j);

/// Model, constraint and grid ready for the solver.
struct Problem {
  FriedrichsSystem system;
  ConvexSet constraint;
  Grid grid;
};
Problem make_problem(const RunConfig& cfg);

}  // namespace cfrelax::cli
