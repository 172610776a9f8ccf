#pragma once

#include <vector>

#include "tahg/types.hpp"

namespace tahg {

// Result of one s-walk: the visited hyperedge sequence and its node set.
struct SubgraphSample {
  NodeId center = 0;
  std::vector<EdgeId> hyperedges;  // visiting order
  std::vector<NodeId> nodes;       // sorted, unique
};

}  // namespace tahg
