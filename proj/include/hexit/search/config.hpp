#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hexit::search {

enum class SearchMode { vanilla, policy, policy_value };

std::string_view to_string(SearchMode mode);
SearchMode parse_search_mode(std::string_view text);

struct SearchConfig {
  SearchMode mode = SearchMode::vanilla;
  int iterations = 10000;
  double c_b = 0.25;           // exploration constant
  double c_rave = 3000.0;
  int expansion_threshold = 0;  // edge visits required before its child joins the tree
  double w_a = 0.0;            // policy prior weight
  double tau = 1.0;            // softmax temperature of the prior
  double w_v = 0.0;            // value estimate weight
  uint64_t seed = 0;

  bool uses_network() const { return mode != SearchMode::vanilla; }

  // Per-mode defaults at full (10,000 iteration) scale.
  static SearchConfig defaults(SearchMode mode);
};

}  // namespace hexit::search
