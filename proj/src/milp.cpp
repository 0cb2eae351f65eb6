#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "svcloc/lp.hpp"

namespace svcloc::lp {

std::string to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::Unbounded: return "unbounded";
    case MilpStatus::NodeLimit: return "node_limit";
    case MilpStatus::Stalled: return "stalled";
  }
  return "unknown";
}

void MixedBinaryProgram::check() const {
  lp.check();
  for (Index b : binaries) {
    if (b >= lp.num_variables()) throw std::invalid_argument("binary index out of range");
    if (lp.lower(b) < 0.0 || lp.upper(b) > 1.0)
      throw std::invalid_argument("binary variable " + std::to_string(b) + " must carry bounds within [0,1]");
  }
}

namespace {

struct Node {
  std::vector<double> lower;  // per binary
  std::vector<double> upper;
  double parent_bound;        // in maximization form
  Index depth;
};

}  // namespace

// Depth-first branch-and-bound on the most fractional binary. Every
// restart_interval processed nodes, the open node with the best bound is
// moved to the top of the stack.
MilpSolution solve_milp(const MixedBinaryProgram& mbp, const MilpOptions& options) {
  mbp.check();
  const double sense = mbp.lp.sense() == Sense::Maximize ? 1.0 : -1.0;
  const Index k = mbp.binaries.size();

  MilpSolution result;
  bool have_incumbent = false;
  double incumbent = -kInfinity;  // maximization form
  bool stalled = false;

  auto prune_threshold = [&] {
    return incumbent + std::max(options.abs_gap, options.rel_gap * std::abs(incumbent));
  };

  std::vector<Node> open;
  {
    Node root;
    root.lower.resize(k);
    root.upper.resize(k);
    for (Index t = 0; t < k; ++t) {
      root.lower[t] = std::ceil(mbp.lp.lower(mbp.binaries[t]) - options.integrality);
      root.upper[t] = std::floor(mbp.lp.upper(mbp.binaries[t]) + options.integrality);
    }
    root.parent_bound = kInfinity;
    root.depth = 0;
    open.push_back(std::move(root));
  }

  LinearProgram work = mbp.lp;
  Index processed = 0;
  while (!open.empty()) {
    if (processed >= options.node_limit) break;
    if (options.restart_interval && processed > 0 && processed % options.restart_interval == 0) {
      auto best = std::max_element(open.begin(), open.end(),
                                   [](const Node& a, const Node& b) { return a.parent_bound < b.parent_bound; });
      std::iter_swap(best, open.end() - 1);
    }
    Node node = std::move(open.back());
    open.pop_back();
    if (have_incumbent && node.parent_bound <= prune_threshold()) continue;
    ++processed;

    bool empty_box = false;
    for (Index t = 0; t < k; ++t) {
      if (node.lower[t] > node.upper[t]) empty_box = true;
      work.set_bounds(mbp.binaries[t], node.lower[t], node.upper[t]);
    }
    if (empty_box) continue;

    const LpSolution rel = solve_lp(work, options.lp);
    if (rel.status == Status::Infeasible) continue;
    if (rel.status == Status::Unbounded) {
      if (node.depth == 0) {
        result.status = MilpStatus::Unbounded;
        result.nodes = processed;
        return result;
      }
      continue;
    }
    if (rel.status == Status::Stalled) {
      stalled = true;
      continue;
    }
    const double bound = sense * rel.objective;
    if (have_incumbent && bound <= prune_threshold()) continue;

    Index branch = k;
    double best_frac = options.integrality;
    for (Index t = 0; t < k; ++t) {
      const double v = rel.primal[mbp.binaries[t]];
      const double frac = std::abs(v - std::round(v));
      if (frac > best_frac) {
        best_frac = frac;
        branch = t;
      }
    }

    if (branch == k) {
      if (!have_incumbent || bound > incumbent) {
        have_incumbent = true;
        incumbent = bound;
        result.values = rel.primal;
        for (Index b : mbp.binaries) result.values[b] = std::round(result.values[b]);
        result.objective = rel.objective;
        result.incumbent_history.push_back(rel.objective);
      }
      continue;
    }

    const double v = rel.primal[mbp.binaries[branch]];
    Node down = node, up = std::move(node);
    down.upper[branch] = 0.0;
    up.lower[branch] = 1.0;
    down.parent_bound = up.parent_bound = bound;
    down.depth = up.depth = down.depth + 1;
    // Push the preferred child last so it is explored first.
    if (v >= 0.5) {
      open.push_back(std::move(down));
      open.push_back(std::move(up));
    } else {
      open.push_back(std::move(up));
      open.push_back(std::move(down));
    }
  }

  result.nodes = processed;
  double open_bound = -kInfinity;
  for (const auto& n : open) open_bound = std::max(open_bound, n.parent_bound);

  if (!have_incumbent) {
    result.status = !open.empty() ? MilpStatus::NodeLimit : (stalled ? MilpStatus::Stalled : MilpStatus::Infeasible);
    result.bound = sense * open_bound;
    return result;
  }
  if (!open.empty() && open_bound > prune_threshold()) {
    result.status = MilpStatus::NodeLimit;
    result.bound = sense * open_bound;
  } else {
    result.status = stalled ? MilpStatus::Stalled : MilpStatus::Optimal;
    result.bound = result.objective;
  }
  return result;
}

}  // namespace svcloc::lp
