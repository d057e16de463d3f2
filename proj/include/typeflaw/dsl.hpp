#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "typeflaw/protocol.hpp"

namespace tf {

struct StrandInstance {
  std::string label;
  std::string role;
  std::vector<std::pair<std::string, Term>> bindings;
};

struct Scenario {
  std::string name;
  std::string protocol;
  std::map<std::string, TypeTag> atoms;
  std::vector<StrandInstance> instances;
  std::vector<Term> goals;  // each becomes a strand with a single '-' node
  std::vector<Term> know;
  std::vector<Term> weak;
  bool assoc_pairs = false;
};

Protocol parse_protocol(std::string_view text);
Scenario parse_scenario(std::string_view text);
std::string print_protocol(const Protocol& P);

SemiBundle build_semibundle(const Protocol& P, const Scenario& sc);

std::string read_file(const std::string& path);
Protocol load_protocol(const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace tf
