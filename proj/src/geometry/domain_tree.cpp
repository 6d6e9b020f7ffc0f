#include "woi/geometry.hpp"

#include <cmath>
#include <string>

namespace woi {

void DomainTree::check_structure() const {
  int const n = size();
  if (n == 0) throw TreeError("domain has no surfaces");
  if (static_cast<int>(parent.size()) != n) throw TreeError("parent map size differs from surface count");
  if (static_cast<int>(sigma.size()) != n) throw TreeError("sigma size differs from surface count");
  int const d = surfaces.front()->dim();
  for (int i = 0; i < n; ++i) {
    if (!surfaces[static_cast<std::size_t>(i)]) throw TreeError("null surface at index " + std::to_string(i + 1));
    if (surface(i).dim() != d) throw TreeError("surfaces mix dimensions");
    if (!(sigma[static_cast<std::size_t>(i)] >= 0.0) || !std::isfinite(sigma[static_cast<std::size_t>(i)])) {
      throw TreeError("sigma must be finite and nonnegative");
    }
  }
  if (parent[0] != -1) throw TreeError("surface 1 is the outer boundary and has no parent");
  for (int i = 1; i < n; ++i) {
    int const p = parent[static_cast<std::size_t>(i)];
    if (p < 0 || p >= n || p == i) {
      throw TreeError("surface " + std::to_string(i + 1) + " has an invalid parent");
    }
  }
  // Every chain of parents must reach the root within n hops.
  for (int i = 1; i < n; ++i) {
    int cur = i;
    int hops = 0;
    while (cur != 0) {
      cur = parent[static_cast<std::size_t>(cur)];
      if (++hops > n) throw TreeError("parent map contains a cycle");
    }
  }
}

std::vector<int> DomainTree::children(int i) const {
  std::vector<int> out;
  for (int j = 1; j < size(); ++j) {
    if (parent[static_cast<std::size_t>(j)] == i) out.push_back(j);
  }
  return out;
}

TreeValidation validate_tree(DomainTree const& tree, int n_probe, std::uint64_t seed) {
  if (n_probe < 1) throw Error("validate_tree needs n_probe >= 1");
  tree.check_structure();
  TreeValidation report;
  for (int i = 1; i < tree.size(); ++i) {
    int const p = tree.parent[static_cast<std::size_t>(i)];
    std::vector<int> siblings = tree.children(p);
    std::erase(siblings, i);
    RandomStream rng(seed, stream_id(StreamTag::kGeometry, static_cast<std::uint64_t>(i)));
    for (int k = 0; k < n_probe; ++k) {
      Vec const y = tree.surface(i).sample_uniform(rng).point.x;
      if (!tree.surface(p).contains(y)) {
        report.violations.push_back({i + 1, k, "point of surface " + std::to_string(i + 1) +
                                               " lies outside its parent " + std::to_string(p + 1)});
      }
      for (int s : siblings) {
        if (tree.surface(s).contains(y)) {
          report.violations.push_back({i + 1, k, "point of surface " + std::to_string(i + 1) +
                                                 " lies inside sibling " + std::to_string(s + 1)});
        }
      }
    }
  }
  return report;
}

}  // namespace woi
