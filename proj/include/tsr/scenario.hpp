#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "tsr/key_value.hpp"

namespace tsr {

// Physical and protocol parameters of one source-relay-destination link.
// Distances are dimensionless multiples of the source-destination distance
// unit; the relay sits at phi * d_sd from the source.
struct Scenario {
  std::size_t n_s = 2;
  std::size_t n_r = 2;
  std::size_t n_d = 2;
  std::size_t k_subcarriers = 2;
  double bandwidth_hz = 1000.0;
  double p_source = 1.0;         // W
  double eta = 1.0;              // energy conversion efficiency
  double phi = 0.5;              // d_SR / d_SD
  double d_sd = 1.0;
  double pathloss_exp = 4.0;
  double noise_total_w = 1e-6;   // over the whole band
  std::uint64_t seed = 1;

  // min(N_S, N_R, N_D): spatial streams per subcarrier.
  std::size_t streams_per_subcarrier() const;
  std::size_t subchannel_count() const { return k_subcarriers * streams_per_subcarrier(); }

  // sigma_R^2 = sigma_D^2 = noise_total_w / K.
  double noise_per_subchannel() const { return noise_total_w / static_cast<double>(k_subcarriers); }

  double d_sr() const { return phi * d_sd; }
  double d_rd() const { return (1.0 - phi) * d_sd; }

  // Throws ValidationError naming the first offending field.
  void validate() const;
};

const std::set<std::string, std::less<>>& scenario_keys();

// Reads the scenario keys present in `doc`; absent keys keep their defaults.
// Does not reject foreign keys (callers embedding a scenario do that).
Scenario scenario_from_document(const KeyValueDocument& doc, Scenario base = {});

// Standalone scenario file: unknown keys are errors.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace tsr
