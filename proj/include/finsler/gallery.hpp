#pragma once

// Bundled example metrics with their expected-property manifests.

#include <cstdint>
#include <string>
#include <vector>

#include "finsler/classify.hpp"

namespace finsler {

/// One expected property: `check` names a measured quantity, which must be
/// below (relation "<") or above (">") `bound`.
struct ExpectedProperty {
  std::string check;
  std::string relation;
  double bound = 0.0;
  std::string provenance;  // PAPER, DERIVED or TRIVIAL
  std::string note;
};

struct GalleryEntry {
  MetricSpec spec;
  std::string description;
  std::vector<ExpectedProperty> manifest;
};

const std::vector<std::string>& gallery_names();
GalleryEntry gallery_load(const std::string& name);
/// Metric file text for a gallery entry.
std::string gallery_export(const std::string& name);

struct ManifestResult {
  ExpectedProperty property;
  double measured = 0.0;  // largest value over the sampled points
  bool pass = false;
};

/// Re-measures every manifest entry at `points` seeded points.
std::vector<ManifestResult> check_manifest(const GalleryEntry& entry, int points, std::uint64_t seed,
                                           const ClassifyOptions& o = {});

}  // namespace finsler
