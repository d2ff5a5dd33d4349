#pragma once

#include <string>

namespace lacelab {

enum class Model { saw, percolation, ltla };

std::string to_string(Model m);
// Accepts "saw", "percolation", "ltla" (case-insensitive).
Model parse_model(const std::string& s);

}  // namespace lacelab
