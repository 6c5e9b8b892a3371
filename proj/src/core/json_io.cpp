#include "json_io.hpp"

#include <iomanip>
#include <sstream>

namespace bfem {

ordered_json coefficient_to_json(const CoefficientField& c) {
  ordered_json j;
  j["regions"] = ordered_json::array();
  for (const auto& [label, m] : c.regions) {
    ordered_json r;
    r["label"] = label;
    r["matrix"] = {m.xx, m.yy, m.zz, m.xy, m.xz, m.yz};
    j["regions"].push_back(r);
  }
  if (!c.limits.empty()) {
    j["limits"] = ordered_json::array();
    for (const auto& lim : c.limits) {
      ordered_json l;
      l["point"] = {lim.point.x(), lim.point.y(), lim.point.z()};
      l["x_side"] = lim.x_side;
      l["matrix"] = {lim.value.xx, lim.value.yy, lim.value.zz,
                     lim.value.xy, lim.value.xz, lim.value.yz};
      j["limits"].push_back(l);
    }
  }
  if (c.perturb_eps) j["perturb_eps"] = *c.perturb_eps;
  return j;
}

CoefficientField coefficient_from_json(const ordered_json& j) {
  CoefficientField c;
  if (!j.contains("regions"))
    fail(ErrorCode::Config, "coefficient schema requires a 'regions' array");
  for (const auto& r : j.at("regions")) {
    const auto& m = r.at("matrix");
    if (m.size() != 6) fail(ErrorCode::Config, "coefficient matrix needs 6 entries");
    SymMat3 s{m[0], m[1], m[2], m[3], m[4], m[5]};
    c.regions.emplace(r.at("label").get<int>(), s);
  }
  if (j.contains("limits")) {
    for (const auto& l : j.at("limits")) {
      CoefficientField::Limit lim;
      lim.point = Vec3(l.at("point")[0], l.at("point")[1], l.at("point")[2]);
      lim.x_side = l.at("x_side").get<int>();
      const auto& m = l.at("matrix");
      lim.value = SymMat3{m[0], m[1], m[2], m[3], m[4], m[5]};
      c.limits.push_back(lim);
    }
  }
  if (j.contains("perturb_eps")) c.perturb_eps = j.at("perturb_eps").get<double>();
  return c;
}

ordered_json map_to_json(const PiecewiseAffineMap& m) {
  ordered_json j;
  j["cells"] = ordered_json::array();
  for (const auto& cell : m.cells) {
    ordered_json c;
    c["halfspaces"] = ordered_json::array();
    for (const auto& h : cell.region) {
      ordered_json hs;
      hs["normal"] = {h.normal.x(), h.normal.y(), h.normal.z()};
      hs["bound"] = h.bound;
      c["halfspaces"].push_back(hs);
    }
    ordered_json lin = ordered_json::array();
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) lin.push_back(cell.map.linear(r, col));
    c["matrix"] = lin;
    c["offset"] = {cell.map.offset.x(), cell.map.offset.y(), cell.map.offset.z()};
    j["cells"].push_back(c);
  }
  return j;
}

PiecewiseAffineMap map_from_json(const ordered_json& j) {
  PiecewiseAffineMap m;
  for (const auto& c : j.at("cells")) {
    MapCell cell;
    for (const auto& hs : c.at("halfspaces")) {
      HalfSpace h;
      h.normal = Vec3(hs.at("normal")[0], hs.at("normal")[1], hs.at("normal")[2]);
      h.bound = hs.at("bound").get<double>();
      cell.region.push_back(h);
    }
    const auto& lin = c.at("matrix");
    if (lin.size() != 9) fail(ErrorCode::Config, "map matrix needs 9 row-major entries");
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) cell.map.linear(r, col) = lin[3 * r + col];
    cell.map.offset = Vec3(c.at("offset")[0], c.at("offset")[1], c.at("offset")[2]);
    m.cells.push_back(cell);
  }
  if (m.cells.empty()) fail(ErrorCode::Config, "map needs at least one cell");
  return m;
}

std::uint64_t coefficient_hash(const CoefficientField& c) {
  const std::string dump = coefficient_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_string(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

} // namespace bfem
