#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "tsr/complex_matrix.hpp"
#include "tsr/scenario.hpp"
#include "tsr/svd.hpp"

namespace tsr {

using Rng = std::mt19937_64;

// Squared singular value of one spatial layer on one subcarrier.
struct SubchannelGain {
  double gain = 0.0;
  std::size_t subcarrier = 0;
  std::size_t layer = 0;

  bool operator==(const SubchannelGain&) const = default;
};

// Flattened subchannel index: n = subcarrier * streams + layer, a bijection
// onto [0, K * streams).
constexpr std::size_t flat_index(std::size_t subcarrier, std::size_t layer,
                                 std::size_t streams) {
  return subcarrier * streams + layer;
}

// Squared singular values below this fraction of the matrix's largest one
// are reported as exactly zero.
inline constexpr double kRankFloor = 1e-14;

struct ChannelRealization {
  std::size_t streams = 0;          // N = min(N_S, N_R, N_D)
  std::vector<ComplexMatrix> h1;    // K matrices, N_R x N_S
  std::vector<ComplexMatrix> h2;    // K matrices, N_D x N_R
  std::vector<SvdResult> svd1;
  std::vector<SvdResult> svd2;
  std::vector<SubchannelGain> gains1;  // K * N entries in flat_index order
  std::vector<SubchannelGain> gains2;

  std::size_t subcarriers() const { return h1.size(); }

  bool operator==(const ChannelRealization& other) const;
};

// i.i.d. CN(0, d^-pathloss_exp) entries: d = d_SR on hop 1, d_RD on hop 2.
ChannelRealization generate_channel(const Scenario& scenario, Rng& rng);

// Builds a realization from given matrices (tests, replayed channels).
ChannelRealization realization_from_matrices(std::vector<ComplexMatrix> h1,
                                             std::vector<ComplexMatrix> h2,
                                             std::size_t streams);

struct EffectiveSubchannels {
  // Each list is sorted by gain, descending; entries keep their
  // (subcarrier, layer) provenance.
  std::vector<SubchannelGain> hop1;
  std::vector<SubchannelGain> hop2;
};

EffectiveSubchannels effective_subchannels(const ChannelRealization& real);

std::vector<SubchannelGain> sorted_descending(std::vector<SubchannelGain> gains);
std::vector<double> gain_values(const std::vector<SubchannelGain>& gains);

}  // namespace tsr
