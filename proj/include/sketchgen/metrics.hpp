#pragma once

// Equivalence proxies between an expected program and a ranked list of
// predictions: M1 alpha-equivalence, M2 call-sequence and M3 call-set
// Jaccard distances, M4 statement-count and M5 control-structure-count
// relative differences.

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <vector>

#include "sketchgen/api_database.hpp"
#include "sketchgen/program.hpp"

namespace sketchgen {

/// Binders renamed v0, v1, ... in pre-order and sequences right-nested.
/// Free variables and `$T` inputs keep their names.
ProgramPtr alpha_canonical(const ProgramPtr& p);
std::string canonical_text(const ProgramPtr& p);
bool alpha_equal(const ProgramPtr& a, const ProgramPtr& b);

/// A call sequence is a list of resolved signature keys ("T.m(A,B)").
using CallSequence = std::vector<std::string>;

inline constexpr int kDefaultUnroll = 1;
inline constexpr std::size_t kDefaultPathCap = 4096;

/// Calls along every control-flow path. A loop runs its condition, then
/// 0..unroll times body and condition again. A try either completes its body
/// or stops after some call of it and runs one handler. Throws Untypeable
/// for an ill-typed program and PathExplosion above `cap` paths.
std::set<CallSequence> call_sequences(const ProgramPtr& p, const ApiDatabase& db, int unroll = kDefaultUnroll,
                                      std::size_t cap = kDefaultPathCap);

/// Resolved signature keys of every call in the program.
std::set<std::string> call_set(const ProgramPtr& p, const ApiDatabase& db);

/// Call, Let and Skip leaves.
std::size_t statement_count(const ProgramPtr& p);
/// If, While and Try nodes.
std::size_t control_count(const ProgramPtr& p);

/// 1 − |a∩b|/|a∪b|, with distance(∅, ∅) = 0.
template <class T>
double jaccard_distance(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  std::size_t all = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(all);
}

/// |e − p| / e, or 0/1 when e = 0 depending on whether p is also 0.
double relative_difference(std::size_t expected, std::size_t predicted);

struct MetricScores {
  std::array<double, 5> m{};  // m[0] is M1

  bool operator==(const MetricScores&) const = default;
};

/// Scores of the best prediction per metric. An empty prediction list
/// scores M1 = 0 and 1 on the distances.
MetricScores score(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted, const ApiDatabase& db);

double m1(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted);
double m2(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted, const ApiDatabase& db);
double m3(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted, const ApiDatabase& db);
double m4(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted);
double m5(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted);

/// One column of the report: averages over the records evaluated at one
/// observability fraction.
struct ReportColumn {
  double fraction = 1.0;
  std::size_t records = 0;
  MetricScores mean;
};

/// Rows per metric, columns per fraction.
std::string report_csv(const std::vector<ReportColumn>& columns);
std::string report_text(const std::vector<ReportColumn>& columns, const std::string& title);

}  // namespace sketchgen
