#pragma once

#include <vector>

#include "adaptcs/dataset.hpp"
#include "adaptcs/encoder.hpp"

namespace testing_support {

/// Central-difference check of every parameter tensor on the train-split loss.
/// Returns the largest relative error per tensor, in EncoderParameters order.
std::vector<double> gradient_errors(const adaptcs::DataSet& ds, const adaptcs::EncoderConfig& cfg, bool train);

}  // namespace testing_support
