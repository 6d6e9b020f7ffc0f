#pragma once

#include "woi/geometry.hpp"

#include <json.hpp>

#include <filesystem>

namespace woi {

// {"dim": d, "surfaces": [...], "parent": {"2": 1, ...}, "sigma": [...]}
// Surface indices are 1-based in the document. Unknown keys are rejected
// with ConfigError.
DomainTree domain_from_json(nlohmann::json const& doc);
DomainTree load_domain(std::filesystem::path const& path);

nlohmann::json surface_to_json(Surface const& s);
nlohmann::json domain_to_json(DomainTree const& tree);

// Throws ConfigError naming the first key of `obj` not in `allowed`.
void require_known_keys(nlohmann::json const& obj, std::initializer_list<char const*> allowed,
                        std::string const& where);

}  // namespace woi
