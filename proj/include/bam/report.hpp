#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bam {

enum class Verdict { Pass, Fail, Skipped, Inconclusive };
const char* to_string(Verdict v);

/// Outcome of one diagnostic. For Pass/Fail, pass() <=> worst_violation <= tolerance.
struct CheckReport {
  std::string name;
  Verdict verdict = Verdict::Inconclusive;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::size_t worst_iteration = 0;
  std::string note;
  std::vector<double> margins;

  bool pass() const { return verdict == Verdict::Pass; }
  /// Pass, Skipped, or Inconclusive: nothing contradicted the claim.
  bool acceptable() const { return verdict != Verdict::Fail; }
};

}  // namespace bam
