#pragma once

// JSON serialization of problems, witnesses and reports. Matrices are
// nested row lists of [re, im] pairs; system labels are 1-based.

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qmarg/identical.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/witness.hpp"

namespace qmarg::io {

using Json = nlohmann::ordered_json;

/// Hermiticity, trace and positivity tolerance for file data; loose enough to
/// admit matrices published to six digits.
inline constexpr double kFileTol = 1e-6;

inline constexpr const char* kWitnessSchema = "qmarg.witness";
inline constexpr const char* kReportSchema = "qmarg.report";
inline constexpr int kSchemaVersion = 1;

struct Generator {
  std::string name;
  double p = 0.0;
};

/// Parsed problem file. Every field except dims is optional; which ones a
/// command needs is checked by the command.
struct ProblemFile {
  SystemShape shape;
  std::optional<MarginalSet> marginals;
  std::optional<Statistics> statistics;
  std::optional<int> particles;
  std::optional<HermitianOperator> hamiltonian;
  std::optional<Generator> generator;
  /// A full-shape operator, given as "operator" (a matrix) or as
  /// "operator_numerators" with "operator_denominator".
  std::optional<HermitianOperator> op;
};

Json matrix_to_json(const Matrix& m);
/// Throws InvalidInput for ragged or non-numeric data.
Matrix matrix_from_json(const Json& j);

Json subset_to_json(const Subset& s);

/// Throws InvalidInput on any schema or validation error.
ProblemFile parse_problem(const Json& j);
ProblemFile load_problem(const std::string& path);

/// Marginals of the file, or those of its generator (with `p` overriding the
/// generator parameter when given).
MarginalSet problem_marginals(const ProblemFile& pf, std::optional<double> p = std::nullopt);

Json marginals_to_json(const MarginalSet& ms);
Json problem_to_json(const MarginalSet& ms);

Json witness_to_json(const Witness& w);
Witness witness_from_json(const Json& j);
Witness load_witness(const std::string& path);

Json load_json(const std::string& path);
void save_json(const Json& j, const std::string& path);

/// {"schema": "qmarg.report", "version": 1, "command": command}.
Json report_header(const std::string& command);

/// Scalar fields of a report as "key: value" lines; arrays of scalars are
/// printed inline and nested objects are summarized by their scalars.
std::string render_text(const Json& report);

}  // namespace qmarg::io
