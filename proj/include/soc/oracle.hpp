#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "soc/model.hpp"
#include "soc/parallel.hpp"

namespace soc {

// Built-in verification suite behind the `oracle` CLI command: gradient
// checks against central finite differences, Monte-Carlo vs exact
// enumeration, metric brute-force oracles, reduction identities, and
// determinism. Each check is independent and reports one line.
struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct OracleOptions {
  std::uint64_t seed = 2026;
  ExecPolicy policy = ExecPolicy::serial();
};

OracleCheck check_reduction_identity(const OracleOptions& opt);
OracleCheck check_estimator_vs_enumeration(const OracleOptions& opt);
OracleCheck check_gradient_score(const OracleOptions& opt);
OracleCheck check_gradient_class_loss(const OracleOptions& opt);
OracleCheck check_gradient_penalty(const OracleOptions& opt);
OracleCheck check_objective_reduction(const OracleOptions& opt);
OracleCheck check_wr_removal(const OracleOptions& opt);
OracleCheck check_metric_oracles(const OracleOptions& opt);
OracleCheck check_determinism(const OracleOptions& opt);

std::vector<OracleCheck> run_oracle_suite(const OracleOptions& opt);

bool all_passed(const std::vector<OracleCheck>& checks);
void write_oracle_report(std::ostream& out,
                         const std::vector<OracleCheck>& checks);

// Central finite differences of `objective` at `params` versus `analytic`,
// coordinate by coordinate. A coordinate passes when the relative error is
// within tol or both values fall under the absolute floor. Exposed so tests
// can confirm the comparator flags an injected gradient bug.
bool gradients_match(const std::function<double(const ModelParams&)>& objective,
                     ModelParams params, const GradientSet& analytic,
                     double step, double tol, std::string* detail = nullptr);

}  // namespace soc
