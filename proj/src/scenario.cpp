#include "tsr/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace tsr {
namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ValidationError(std::string("scenario field '") + field + "' " + what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::size_t Scenario::streams_per_subcarrier() const { return std::min({n_s, n_r, n_d}); }

void Scenario::validate() const {
  require(n_s >= 1, "n_s", "must be >= 1");
  require(n_r >= 1, "n_r", "must be >= 1");
  require(n_d >= 1, "n_d", "must be >= 1");
  require(k_subcarriers >= 1, "k_subcarriers", "must be >= 1");
  require(positive_finite(bandwidth_hz), "bandwidth_hz", "must be > 0");
  require(positive_finite(p_source), "p_source", "must be > 0");
  require(std::isfinite(eta) && eta > 0.0 && eta <= 1.0, "eta", "must lie in (0, 1]");
  require(std::isfinite(phi) && phi > 0.0 && phi < 1.0, "phi", "must lie in (0, 1)");
  require(positive_finite(d_sd), "d_sd", "must be > 0");
  require(positive_finite(pathloss_exp), "pathloss_exp", "must be > 0");
  require(positive_finite(noise_total_w), "noise_total_w", "must be > 0");
}

const std::set<std::string, std::less<>>& scenario_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "n_s", "n_r", "n_d", "k_subcarriers", "bandwidth_hz", "p_source", "eta",
      "phi", "d_sd", "pathloss_exp", "noise_total_w", "seed"};
  return keys;
}

Scenario scenario_from_document(const KeyValueDocument& doc, Scenario base) {
  Scenario s = base;
  s.n_s = doc.get_count("n_s", s.n_s);
  s.n_r = doc.get_count("n_r", s.n_r);
  s.n_d = doc.get_count("n_d", s.n_d);
  s.k_subcarriers = doc.get_count("k_subcarriers", s.k_subcarriers);
  s.bandwidth_hz = doc.get_double("bandwidth_hz", s.bandwidth_hz);
  s.p_source = doc.get_double("p_source", s.p_source);
  s.eta = doc.get_double("eta", s.eta);
  s.phi = doc.get_double("phi", s.phi);
  s.d_sd = doc.get_double("d_sd", s.d_sd);
  s.pathloss_exp = doc.get_double("pathloss_exp", s.pathloss_exp);
  s.noise_total_w = doc.get_double("noise_total_w", s.noise_total_w);
  s.seed = doc.get_u64("seed", s.seed);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const auto doc = KeyValueDocument::load(path);
  doc.reject_unknown(scenario_keys());
  Scenario s = scenario_from_document(doc);
  s.validate();
  return s;
}

}  // namespace tsr
