#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fbmiso/bounds.hpp"

// Regenerates the golden file of sampled bound constants.
int main(int argc, char** argv) {
  CLI::App app{"Record sup constants of the sampled bounds"};
  std::vector<double> hs{0.6, 0.75, 0.9};
  std::size_t samples = 1000000;
  std::uint64_t seed = 20240917;
  double margin = 1.5;
  int west_grid = 50;
  int west_repeats = 4;
  std::string out = "data/recorded_constants.ini";
  app.add_option("--hurst", hs, "Hurst exponents");
  app.add_option("--samples", samples, "samples per bound");
  app.add_option("--seed", seed, "sampling seed");
  app.add_option("--margin", margin, "factor applied to sampled maxima");
  app.add_option("--west-grid", west_grid, "grid size for the Lambda envelope");
  app.add_option("--out", out, "output INI file");
  CLI11_PARSE(app, argc, argv);

  fbmiso::RecordedConstants rc;
  rc.margin = margin;
  rc.samples = samples;
  rc.seed = seed;
  fbmiso::QuadratureSpec spec;
  for (double h : hs) {
    const fbmiso::HurstModel m(h, 1);
    for (const auto& name : fbmiso::recorded_bound_names()) {
      const auto c = fbmiso::check_bound(m, name, 1e300, samples, seed);
      rc.set(name, h, margin * c.max_ratio);
      spdlog::info("H={} {}: sampled max {:.6g}", h, name, c.max_ratio);
    }
    for (double q : {1.5, 2.0}) {
      double worst = 0.0;
      for (int r = 0; r < west_repeats; ++r) {
        worst = std::max(worst, fbmiso::west_envelope_max(m, q, west_grid, seed + 100 + r, spec));
      }
      rc.set(fmt::format("west_q{:g}", q), h, margin * worst);
      spdlog::info("H={} west q={}: grid max {:.6g}", h, q, worst);
    }
    // sharp constant of the squared-norm bound, not a sampled sup
    const double q = fbmiso::corollary_q(m);
    const auto k = fbmiso::corollary_constant(m, q, spec);
    rc.set("corollary", h, k.value);
    spdlog::info("H={} corollary constant {:.10g} (q = {:.4g}, error {:.2g})", h, k.value, q, k.error);
  }
  rc.save(out);
  return 0;
}
