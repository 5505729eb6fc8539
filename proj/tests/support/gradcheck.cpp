#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "toy.hpp"

namespace testing_support {

using namespace adaptcs;

namespace {

double loss_at(EncoderState& s, const EncoderInputs& in, const DataSet& ds, const std::vector<char>& mask,
               bool train) {
  const EmbeddingTable t = forward(s, in, train, 3);
  return nll_loss(t.logits, ds.labels, mask);
}

}  // namespace

// Largest entrywise |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) per tensor.
std::vector<double> gradient_errors(const adaptcs::DataSet& ds, const adaptcs::EncoderConfig& cfg, bool train) {
  const EncoderInputs in = inputs_for(ds, cfg);
  EncoderState s = init_encoder(cfg, ds.features.cols(), ds.num_classes);
  const std::vector<char> mask = split_mask(ds, Split::train);
  forward(s, in, train, 3);
  const EncoderParameters g = grad(s, in, ds.labels, mask);
  std::vector<double> errs;
  constexpr double step = 1e-5;
  for (std::size_t t = 0; t < EncoderParameters::kTensorCount; ++t) {
    double worst = 0.0;
    auto values = s.params.tensor(t).values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double keep = values[j];
      values[j] = keep + step;
      const double up = loss_at(s, in, ds, mask, train);
      values[j] = keep - step;
      const double down = loss_at(s, in, ds, mask, train);
      values[j] = keep;
      const double numeric = (up - down) / (2 * step);
      const double analytic = g.tensor(t).values()[j];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    errs.push_back(worst);
  }
  return errs;
}

}  // namespace testing_support
