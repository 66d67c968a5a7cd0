#pragma once
// Breadth-first ball enumeration with equality decided by Dehn's algorithm. A faithful SL(2,R)
// image only narrows the candidates: two words are merged iff Dehn says they are equal.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "anosov_lab/replin.hpp"
#include "dehn.hpp"

namespace oracle {

struct BfsBall {
  std::vector<std::vector<std::vector<alab::Letter>>> spheres;
};

inline BfsBall bfs_ball(const alab::Representation& faithful, int radius) {
  const alab::Presentation& p = faithful.presentation();
  Dehn dehn(p);
  using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  auto key = [](const M& m) { return static_cast<double>(m.cwiseAbs().sum()); };
  struct Entry {
    std::vector<alab::Letter> w;
    M m;
  };
  std::vector<Entry> all;
  std::multimap<double, std::size_t> index;
  auto find = [&](const std::vector<alab::Letter>& w, const M& m) {
    const double k = key(m);
    for (auto it = index.lower_bound(k * (1 - 1e-9) - 1e-12); it != index.end() && it->first <= k * (1 + 1e-9) + 1e-12;
         ++it) {
      const M& o = all[it->second].m;
      const long double tol = 1e-9L * static_cast<long double>(k);
      if ((o - m).cwiseAbs().maxCoeff() > tol && (o + m).cwiseAbs().maxCoeff() > tol) continue;
      if (!dehn.equal(w, all[it->second].w)) throw std::logic_error("faithful image identifies distinct words");
      return true;
    }
    return false;
  };
  BfsBall out;
  M id = M::Identity(faithful.dim(), faithful.dim());
  all.push_back({{}, id});
  index.emplace(key(id), 0);
  out.spheres.push_back({{}});
  std::vector<std::size_t> frontier{0};
  for (int n = 1; n <= radius; ++n) {
    std::vector<std::size_t> next;
    std::vector<std::vector<alab::Letter>> sphere;
    for (std::size_t i : frontier)
      for (std::size_t s = 0; s < p.generator_count(); ++s) {
        std::vector<alab::Letter> w = all[i].w;
        w.push_back(static_cast<alab::Letter>(s));
        M m = all[i].m * faithful.matrix(static_cast<alab::Letter>(s)).cast<long double>();
        if (find(w, m)) continue;
        all.push_back({w, m});
        index.emplace(key(m), all.size() - 1);
        next.push_back(all.size() - 1);
        sphere.push_back(w);
      }
    out.spheres.push_back(std::move(sphere));
    frontier = std::move(next);
  }
  return out;
}

}  // namespace oracle
