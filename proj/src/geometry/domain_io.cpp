#include "woi/domain_io.hpp"

#include <algorithm>
#include <fstream>
#include <string>

namespace woi {
namespace {

using nlohmann::json;

double number(json const& obj, char const* key, std::string const& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  auto const& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

Vec point(json const& v, int dim, std::string const& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw ConfigError(where + ": expected an array of " + std::to_string(dim) + " numbers");
  }
  Vec out(dim);
  for (int k = 0; k < dim; ++k) {
    if (!v[static_cast<std::size_t>(k)].is_number()) throw ConfigError(where + ": non-numeric coordinate");
    out[k] = v[static_cast<std::size_t>(k)].get<double>();
  }
  return out;
}

SurfacePtr surface_from_json(json const& s, int dim, std::string const& where) {
  if (!s.is_object() || !s.contains("kind") || !s.at("kind").is_string()) {
    throw ConfigError(where + ": surface needs a string \"kind\"");
  }
  std::string const kind = s.at("kind").get<std::string>();
  if (!s.contains("center")) throw ConfigError(where + ": missing \"center\"");
  try {
    if (kind == "sphere") {
      require_known_keys(s, {"kind", "center", "radius"}, where);
      return std::make_shared<Sphere>(point(s.at("center"), dim, where), number(s, "radius", where));
    }
    if (kind == "ellipsoid") {
      require_known_keys(s, {"kind", "center", "A"}, where);
      if (!s.contains("A") || !s.at("A").is_array() || static_cast<int>(s.at("A").size()) != dim) {
        throw ConfigError(where + ": \"A\" must be a d x d array");
      }
      Eigen::MatrixXd a(dim, dim);
      for (int r = 0; r < dim; ++r) {
        Vec const row = point(s.at("A")[static_cast<std::size_t>(r)], dim, where + ".A");
        a.row(r) = row.transpose();
      }
      return std::make_shared<Ellipsoid>(point(s.at("center"), dim, where), a);
    }
    if (kind == "star2d") {
      require_known_keys(s, {"kind", "center", "R", "a", "k", "rotation"}, where);
      if (dim != 2) throw ConfigError(where + ": star2d requires dim 2");
      double const k = number(s, "k", where);
      if (k != std::floor(k)) throw ConfigError(where + ": \"k\" must be an integer");
      double const rot = s.contains("rotation") ? number(s, "rotation", where) : 0.0;
      return std::make_shared<StarCurve2D>(point(s.at("center"), dim, where), number(s, "R", where),
                                           number(s, "a", where), static_cast<int>(k), rot);
    }
  } catch (GeometryError const& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown surface kind \"" + kind + "\"");
}

json vec_json(Vec const& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

}  // namespace

void require_known_keys(json const& obj, std::initializer_list<char const*> allowed, std::string const& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto const& [key, value] : obj.items()) {
    bool const known = std::any_of(allowed.begin(), allowed.end(), [&](char const* a) { return key == a; });
    if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

DomainTree domain_from_json(json const& doc) {
  require_known_keys(doc, {"dim", "surfaces", "parent", "sigma"}, "domain");
  if (!doc.contains("dim") || !doc.at("dim").is_number_integer()) throw ConfigError("domain: \"dim\" must be an integer");
  int const dim = doc.at("dim").get<int>();
  if (dim < 2 || dim > kMaxDim) throw ConfigError("domain: dim out of range");
  if (!doc.contains("surfaces") || !doc.at("surfaces").is_array() || doc.at("surfaces").empty()) {
    throw ConfigError("domain: \"surfaces\" must be a non-empty array");
  }

  DomainTree tree;
  auto const& surfaces = doc.at("surfaces");
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    tree.surfaces.push_back(surface_from_json(surfaces[i], dim, "domain.surfaces[" + std::to_string(i) + "]"));
  }
  int const n = tree.size();

  tree.parent.assign(static_cast<std::size_t>(n), 0);
  tree.parent[0] = -1;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  if (doc.contains("parent")) {
    auto const& parent = doc.at("parent");
    if (!parent.is_object()) throw ConfigError("domain: \"parent\" must be an object");
    for (auto const& [key, value] : parent.items()) {
      int child = 0;
      try {
        std::size_t used = 0;
        child = std::stoi(key, &used);
        if (used != key.size()) throw ConfigError("");
      } catch (std::exception const&) {
        throw ConfigError("domain.parent: key \"" + key + "\" is not an integer");
      }
      if (child < 2 || child > n) throw ConfigError("domain.parent: child index " + key + " out of range");
      if (!value.is_number_integer()) throw ConfigError("domain.parent: parent of " + key + " must be an integer");
      int const p = value.get<int>();
      if (p < 1 || p > n) throw ConfigError("domain.parent: parent of " + key + " out of range");
      tree.parent[static_cast<std::size_t>(child - 1)] = p - 1;
      seen[static_cast<std::size_t>(child - 1)] = true;
    }
  }
  for (int i = 1; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw ConfigError("domain.parent: surface " + std::to_string(i + 1) + " has no parent");
    }
  }

  if (!doc.contains("sigma") || !doc.at("sigma").is_array() || static_cast<int>(doc.at("sigma").size()) != n) {
    throw ConfigError("domain: \"sigma\" must list one value per surface");
  }
  for (auto const& v : doc.at("sigma")) {
    if (!v.is_number()) throw ConfigError("domain: sigma values must be numbers");
    tree.sigma.push_back(v.get<double>());
  }

  try {
    tree.check_structure();
  } catch (TreeError const& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  return tree;
}

DomainTree load_domain(std::filesystem::path const& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open domain file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (json::parse_error const& e) {
    throw ConfigError("domain file " + path.string() + ": " + e.what());
  }
  return domain_from_json(doc);
}

json surface_to_json(Surface const& s) {
  json out;
  out["kind"] = std::string(s.kind());
  out["center"] = vec_json(s.center());
  if (auto const* sp = dynamic_cast<Sphere const*>(&s)) {
    out["radius"] = sp->radius();
  } else if (auto const* el = dynamic_cast<Ellipsoid const*>(&s)) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < el->form().rows(); ++r) rows.push_back(vec_json(el->form().row(r).transpose()));
    out["A"] = rows;
  } else if (auto const* st = dynamic_cast<StarCurve2D const*>(&s)) {
    out["R"] = st->base_radius();
    out["a"] = st->amplitude();
    out["k"] = st->lobes();
    out["rotation"] = st->rotation();
  }
  return out;
}

json domain_to_json(DomainTree const& tree) {
  json out;
  out["dim"] = tree.dim();
  out["surfaces"] = json::array();
  for (auto const& s : tree.surfaces) out["surfaces"].push_back(surface_to_json(*s));
  out["parent"] = json::object();
  for (int i = 1; i < tree.size(); ++i) {
    out["parent"][std::to_string(i + 1)] = tree.parent[static_cast<std::size_t>(i)] + 1;
  }
  out["sigma"] = tree.sigma;
  return out;
}

}  // namespace woi
