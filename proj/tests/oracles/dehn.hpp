#pragma once
// Dehn's algorithm for one-relator small-cancellation presentations (closed surface groups of
// genus >= 2), used as an independent word-problem oracle.

#include <vector>

#include "anosov_lab/presentation.hpp"

namespace oracle {

class Dehn {
 public:
  explicit Dehn(const alab::Presentation& p) : inv_(p.inverse) {
    const auto& r = p.relators.at(0).letters;
    n_ = r.size();
    std::vector<alab::Letter> ri(r.rbegin(), r.rend());
    for (auto& x : ri) x = inv_[x];
    for (const std::vector<alab::Letter>* base : {&r, static_cast<const std::vector<alab::Letter>*>(&ri)})
      for (std::size_t k = 0; k < n_; ++k) {
        std::vector<alab::Letter> rot(n_);
        for (std::size_t j = 0; j < n_; ++j) rot[j] = (*base)[(k + j) % n_];
        cyclic_.push_back(rot);
      }
  }

  std::vector<alab::Letter> reduce(std::vector<alab::Letter> w) const {
    for (bool changed = true; changed;) {
      changed = false;
      w = free_reduce(w);
      // any subword of more than half a relator is replaced by the shorter complement
      for (std::size_t i = 0; i < w.size() && !changed; ++i)
        for (const auto& r : cyclic_) {
          std::size_t len = 0;
          while (len < n_ && i + len < w.size() && w[i + len] == r[len]) ++len;
          if (2 * len <= n_) continue;
          std::vector<alab::Letter> rep;
          for (std::size_t j = n_; j-- > len;) rep.push_back(inv_[r[j]]);
          std::vector<alab::Letter> out(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(i));
          out.insert(out.end(), rep.begin(), rep.end());
          out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(i + len), w.end());
          w = std::move(out);
          changed = true;
          break;
        }
    }
    return w;
  }

  bool trivial(const std::vector<alab::Letter>& w) const { return reduce(w).empty(); }

  bool equal(const std::vector<alab::Letter>& u, const std::vector<alab::Letter>& v) const {
    std::vector<alab::Letter> w = u;
    for (std::size_t j = v.size(); j-- > 0;) w.push_back(inv_[v[j]]);
    return trivial(w);
  }

 private:
  std::vector<alab::Letter> free_reduce(const std::vector<alab::Letter>& w) const {
    std::vector<alab::Letter> s;
    for (auto x : w) {
      if (!s.empty() && s.back() == inv_[x])
        s.pop_back();
      else
        s.push_back(x);
    }
    return s;
  }

  std::vector<alab::Letter> inv_;
  std::size_t n_ = 0;
  std::vector<std::vector<alab::Letter>> cyclic_;
};

}  // namespace oracle
