#pragma once

#include "chb/grid.hpp"
#include "chb/sparse.hpp"

#include <string_view>

namespace chb {

/// Model variants: plain Cahn-Hilliard, Cahn-Larche (elasticity), and the
/// full Cahn-Hilliard-Biot system.
enum class Model { ch, cl, chb };

std::string_view to_string(Model m);
/// Accepts "ch", "cl", "chb" (case-insensitive); throws on anything else.
Model parse_model(std::string_view text);

inline bool has_mechanics(Model m) { return m != Model::ch; }
inline bool has_flow(Model m) { return m == Model::chb; }

/// The five coupled fields at one time level. u is interleaved per node.
struct State {
  Vector phi, mu, theta, p, u;
  double time = 0.0;

  static State zeros(const Mesh& mesh) {
    const Eigen::Index n = mesh.num_nodes();
    return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), Vector::Zero(n),
            Vector::Zero(2 * n), 0.0};
  }
};

}  // namespace chb
