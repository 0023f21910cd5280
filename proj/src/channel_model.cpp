#include "tsr/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace tsr {
namespace {

ComplexMatrix rayleigh_matrix(std::size_t rows, std::size_t cols, double variance, Rng& rng) {
  // Real and imaginary parts each carry half the power.
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  std::vector<Complex> entries(rows * cols);
  for (auto& z : entries) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = Complex(re, im);
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

void append_gains(const SvdResult& s, std::size_t subcarrier, std::size_t streams,
                  std::vector<SubchannelGain>& out) {
  const double top = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  const double floor = kRankFloor * top * top;
  for (std::size_t l = 0; l < streams; ++l) {
    double g = s.singular_values[l] * s.singular_values[l];
    if (g <= floor) g = 0.0;
    out.push_back(SubchannelGain{g, subcarrier, l});
  }
}

}  // namespace

bool ChannelRealization::operator==(const ChannelRealization& other) const {
  return streams == other.streams && h1 == other.h1 && h2 == other.h2 &&
         gains1 == other.gains1 && gains2 == other.gains2;
}

ChannelRealization generate_channel(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  const double var1 = std::pow(scenario.d_sr(), -scenario.pathloss_exp);
  const double var2 = std::pow(scenario.d_rd(), -scenario.pathloss_exp);
  std::vector<ComplexMatrix> h1;
  std::vector<ComplexMatrix> h2;
  for (std::size_t k = 0; k < scenario.k_subcarriers; ++k) {
    h1.push_back(rayleigh_matrix(scenario.n_r, scenario.n_s, var1, rng));
    h2.push_back(rayleigh_matrix(scenario.n_d, scenario.n_r, var2, rng));
  }
  return realization_from_matrices(std::move(h1), std::move(h2),
                                   scenario.streams_per_subcarrier());
}

ChannelRealization realization_from_matrices(std::vector<ComplexMatrix> h1,
                                             std::vector<ComplexMatrix> h2,
                                             std::size_t streams) {
  if (h1.empty() || h1.size() != h2.size()) {
    throw DimensionError("realization: need the same nonzero number of hop-1 and hop-2 matrices");
  }
  ChannelRealization real;
  real.streams = streams;
  for (std::size_t k = 0; k < h1.size(); ++k) {
    if (h2[k].cols() != h1[k].rows()) {
      throw DimensionError("realization: hop-2 matrix " + shape_string(h2[k]) +
                           " does not consume hop-1 output " + shape_string(h1[k]));
    }
    if (streams == 0 || streams > std::min(h1[k].rows(), h1[k].cols()) ||
        streams > std::min(h2[k].rows(), h2[k].cols())) {
      throw DimensionError("realization: " + std::to_string(streams) +
                           " streams exceed matrix rank bound");
    }
    real.svd1.push_back(svd(h1[k]));
    real.svd2.push_back(svd(h2[k]));
    append_gains(real.svd1.back(), k, streams, real.gains1);
    append_gains(real.svd2.back(), k, streams, real.gains2);
  }
  real.h1 = std::move(h1);
  real.h2 = std::move(h2);
  return real;
}

std::vector<SubchannelGain> sorted_descending(std::vector<SubchannelGain> gains) {
  std::stable_sort(gains.begin(), gains.end(),
                   [](const SubchannelGain& a, const SubchannelGain& b) { return a.gain > b.gain; });
  return gains;
}

EffectiveSubchannels effective_subchannels(const ChannelRealization& real) {
  return EffectiveSubchannels{sorted_descending(real.gains1), sorted_descending(real.gains2)};
}

std::vector<double> gain_values(const std::vector<SubchannelGain>& gains) {
  std::vector<double> out;
  out.reserve(gains.size());
  for (const auto& g : gains) out.push_back(g.gain);
  return out;
}

}  // namespace tsr
