#pragma once

#include <string>

#include "typeflaw/dsl.hpp"

namespace tf::fixtures {

inline std::string corpus(const std::string& file) { return std::string(TF_CORPUS_DIR) + "/" + file; }

inline SemiBundle bundle(const std::string& proto, const std::string& scen) {
  return build_semibundle(load_protocol(corpus(proto)), load_scenario(corpus(scen)));
}

}  // namespace tf::fixtures
