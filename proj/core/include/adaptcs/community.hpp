#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adaptcs/graph.hpp"

namespace adaptcs {

/// A retrieved community. members.front() is the query.
struct CommunityResult {
  NodeId query = 0;
  std::vector<NodeId> members;
  std::vector<double> scores;  // parallel to members
  std::string algorithm;
  double elapsed_s = 0.0;
  std::size_t teleports = 0;
};

}  // namespace adaptcs
