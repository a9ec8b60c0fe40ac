#include "chb/state.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace chb {

std::string_view to_string(Model m) {
  switch (m) {
    case Model::ch:
      return "ch";
    case Model::cl:
      return "cl";
    case Model::chb:
      return "chb";
  }
  return "?";
}

Model parse_model(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "ch") return Model::ch;
  if (s == "cl") return Model::cl;
  if (s == "chb") return Model::chb;
  throw std::invalid_argument("unknown model '" + std::string(text) + "' (expected ch, cl, chb)");
}

}  // namespace chb
