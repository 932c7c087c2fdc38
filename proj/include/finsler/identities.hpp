#pragma once

// Named identity suites evaluated at sampled points. Each identity yields one
// IdentityRow with per-point residuals and a fixed bound.

#include <string>
#include <vector>

#include "finsler/classify.hpp"

namespace finsler {

/// all, riemann_berwald, es, lemma_wdtheta, structure, killing, projective.
const std::vector<std::string>& identity_suites();

struct IdentityOptions {
  ClassifyOptions classify;
  /// Projective factors for the projective suite. Empty selects
  /// "0.1*norm", plus "beta" on (alpha, beta)-metrics.
  std::vector<std::string> factors;
};

/// Throws InputError for an unknown suite, or when the killing suite is
/// requested on a metric without the Killing hypotheses. "all" includes the
/// killing suite only where it applies.
std::vector<IdentityRow> run_identities(std::shared_ptr<const Metric> metric, const std::string& suite,
                                        const std::vector<EvalPoint>& points, const IdentityOptions& o);

bool all_pass(const std::vector<IdentityRow>& rows);

}  // namespace finsler
