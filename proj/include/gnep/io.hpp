#pragma once

#include "gnep/cournot.hpp"
#include "gnep/game.hpp"
#include "gnep/harness.hpp"
#include "gnep/penalty.hpp"

#include <json.hpp>

#include <filesystem>

namespace gnep {

using Json = nlohmann::json;

// All indices are 0-based. Sparse vectors are objects {"<index>": coeff}.

Json game_to_json(const QuadraticGame& game);
QuadraticGame game_from_json(const Json& j);

Json constraints_to_json(const ConstraintSet& cs);
ConstraintSet constraints_from_json(const Json& j);

Json affine_to_json(const AffineConstraint& con);
AffineConstraint affine_from_json(const Json& j);

Json cournot_to_json(const CournotSpec& spec);
CournotSpec cournot_from_json(const Json& j);

/// Resolved config, including the problem description.
Json config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults. The problem comes from "cournot",
/// "network" ({"layout_seed": n}) or "game" + "constraints" (+ "capacities").
ExperimentConfig config_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);

}  // namespace gnep
