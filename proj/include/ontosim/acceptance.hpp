#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ontosim {

enum class Suite { fast, full };

/// Throws InvalidArgument for anything but "fast" or "full".
Suite parse_suite(const std::string& name);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// The ten acceptance criteria. The full suite uses the documented ensemble
/// sizes; the fast suite shrinks ensembles and seed counts but keeps every
/// threshold. Bundled configs are read from scenario_dir.
CriterionResult criterion_unitarity(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_free_gaussian(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_equivariance(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_guidance(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_collapse_rule(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_jump_statistics(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_einstein_box(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_tails(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_energy_increase(Suite suite, const std::string& scenario_dir);
CriterionResult criterion_reproducibility(Suite suite, const std::string& scenario_dir);

/// Runs all criteria in order, calling on_result after each one. A criterion
/// that throws is reported as failed with the exception text.
std::vector<CriterionResult> run_acceptance(
    Suite suite, const std::string& scenario_dir = ONTOSIM_SCENARIO_DIR,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "[PASS]  3 equivariance ... (12.3 s) detail"
std::string format_result(const CriterionResult& r);

}  // namespace ontosim
