#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "finsler/gallery.hpp"

using namespace finsler;

TEST_SUITE("gallery") {
  TEST_CASE("names and loading") {
    const std::vector<std::string> expect{"euclidean",         "riemannian_diag",  "sphere2",
                                          "funk_ball_randers", "shen_avec_randers", "killing_s3_alphabeta"};
    CHECK(gallery_names() == expect);
    CHECK_THROWS_AS(gallery_load("no_such_metric"), InputError);
    CHECK(gallery_load("funk_ball_randers").spec.region.radius == 0.5);
    CHECK(gallery_load("shen_avec_randers").spec.region.radius == doctest::Approx(0.4));
    CHECK(gallery_load("killing_s3_alphabeta").spec.kind == MetricKind::alpha_beta);
    CHECK(gallery_load("funk_ball_randers").spec.kind == MetricKind::randers);
  }

  TEST_CASE("export round trip") {
    for (const auto& name : gallery_names()) {
      CAPTURE(name);
      const std::string text = gallery_export(name);
      const MetricSpec spec = parse_metric_file(text);
      const MetricSpec orig = gallery_load(name).spec;
      CHECK(spec.name == orig.name);
      CHECK(spec.dim == orig.dim);
      CHECK(format_metric_file(spec) == text);
      CHECK_NOTHROW(Metric{spec});
    }
  }

  TEST_CASE("every manifest entry carries provenance and is re-derived") {
    ClassifyOptions o;
    o.threads = 4;
    for (const auto& name : gallery_names()) {
      const GalleryEntry e = gallery_load(name);
      CHECK_FALSE(e.manifest.empty());
      for (const auto& r : check_manifest(e, 5, 42, o)) {
        CAPTURE(name);
        CAPTURE(r.property.check);
        CAPTURE(r.measured);
        CHECK((r.property.relation == "<" || r.property.relation == ">"));
        CHECK((r.property.provenance == "PAPER" || r.property.provenance == "DERIVED" ||
               r.property.provenance == "TRIVIAL"));
        CHECK(r.pass);
      }
    }
  }
}
