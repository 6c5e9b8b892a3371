#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "coefficients.hpp"
#include "transforms.hpp"

namespace bfem {

using ordered_json = nlohmann::ordered_json;

// {"regions":[{"label":..,"matrix":[xx,yy,zz,xy,xz,yz]}],"limits":[...]}
ordered_json coefficient_to_json(const CoefficientField& c);
CoefficientField coefficient_from_json(const ordered_json& j);

// Cells as half-space lists, matrices row-major.
ordered_json map_to_json(const PiecewiseAffineMap& m);
PiecewiseAffineMap map_from_json(const ordered_json& j);

// FNV-1a over the canonical serialization.
std::uint64_t coefficient_hash(const CoefficientField& c);
std::string hash_string(std::uint64_t h);

} // namespace bfem
