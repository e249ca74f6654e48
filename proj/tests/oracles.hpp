#ifndef LINKMSE_TESTS_ORACLES_HPP
#define LINKMSE_TESTS_ORACLES_HPP

// Independent reference implementations used to check the library. These favor
// clarity over speed and deliberately avoid sharing code with src/.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracles {

// Plain recursion, no memoization; fine for short strings.
inline int naive_levenshtein(const std::string& a, const std::string& b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());
  const std::string ta = a.substr(1), tb = b.substr(1);
  if (a[0] == b[0]) return naive_levenshtein(ta, tb);
  return 1 + std::min({naive_levenshtein(ta, b), naive_levenshtein(a, tb),
                       naive_levenshtein(ta, tb)});
}

// Composite Simpson's rule on [lo, hi] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Connected components by repeated BFS over an explicit adjacency map.
inline std::vector<std::vector<std::uint32_t>> bfs_components(
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
  std::map<std::uint32_t, std::set<std::uint32_t>> adj;
  for (auto [i, j] : edges) {
    adj[i].insert(j);
    adj[j].insert(i);
  }
  std::set<std::uint32_t> seen;
  std::vector<std::vector<std::uint32_t>> comps;
  for (const auto& [v, _] : adj) {
    if (seen.count(v)) continue;
    std::vector<std::uint32_t> comp, frontier{v};
    seen.insert(v);
    while (!frontier.empty()) {
      std::uint32_t cur = frontier.back();
      frontier.pop_back();
      comp.push_back(cur);
      for (std::uint32_t next : adj[cur])
        if (seen.insert(next).second) frontier.push_back(next);
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

}  // namespace oracles

#endif
