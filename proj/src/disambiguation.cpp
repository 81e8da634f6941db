#include "dop/disambiguation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "dop/errors.hpp"

namespace dop {

namespace {

enum class Mark : unsigned char { Fresh, Active, Done };

GrammarError cyclic() {
  return GrammarError(GrammarError::Kind::CyclicForest,
                      "forest has a substitution cycle");
}

void check_forest(const DerivationForest& forest) {
  if (!forest.grammar) throw Error("forest has no grammar attached");
}

// Entry ids with every edge's children listed before the entry itself.
// Throws on cycles, which have no such order.
std::vector<int> bottom_up_order(const DerivationForest& forest) {
  std::vector<Mark> mark(forest.entries.size(), Mark::Fresh);
  std::vector<int> order;
  order.reserve(forest.entries.size());
  std::function<void(int)> visit = [&](int id) {
    Mark& m = mark[static_cast<std::size_t>(id)];
    if (m == Mark::Active) throw cyclic();
    if (m == Mark::Done) return;
    m = Mark::Active;
    for (const ForestEdge& edge : forest.entry(id).edges)
      for (int child : edge.children) visit(child);
    m = Mark::Done;
    order.push_back(id);
  };
  for (std::size_t id = 0; id < forest.entries.size(); ++id)
    visit(static_cast<int>(id));
  return order;
}

}  // namespace

InsideMasses compute_inside(const DerivationForest& forest) {
  check_forest(forest);
  const Stsg& g = *forest.grammar;
  InsideMasses result;
  result.mass.assign(forest.entries.size(), 0.0);
  for (int id : bottom_up_order(forest)) {
    double sum = 0.0;
    for (const ForestEdge& edge : forest.entry(id).edges) {
      double term = g.at(edge.tree_id).weight;
      for (int child : edge.children)
        term *= result.mass[static_cast<std::size_t>(child)];
      sum += term;
    }
    result.mass[static_cast<std::size_t>(id)] = sum;
  }
  result.goal_mass =
      forest.goal >= 0 ? result.mass[static_cast<std::size_t>(forest.goal)] : 0.0;
  return result;
}

std::vector<Rational> compute_inside_exact(const DerivationForest& forest) {
  check_forest(forest);
  const Stsg& g = *forest.grammar;
  std::vector<Rational> mass(forest.entries.size(), Rational(0));
  for (int id : bottom_up_order(forest)) {
    Rational sum = 0;
    for (const ForestEdge& edge : forest.entry(id).edges) {
      Rational term = g.at(edge.tree_id).prob;
      for (int child : edge.children)
        term *= mass[static_cast<std::size_t>(child)];
      sum += term;
    }
    mass[static_cast<std::size_t>(id)] = sum;
  }
  return mass;
}

namespace {

// One entry's best subderivation under the deterministic order
// (probability desc, derived-tree serialization asc, id sequence asc).
struct Choice {
  Rational prob;
  Tree tree;
  std::string key;
  std::vector<int> seq;
};

bool preferred(const Choice& a, const Choice& b) {
  if (a.prob != b.prob) return a.prob > b.prob;
  if (a.key != b.key) return a.key < b.key;
  return a.seq < b.seq;
}

void fill_sites(Tree& node, const std::vector<const Tree*>& subs,
                std::size_t& next) {
  if (node.is_open_site()) {
    node = *subs[next++];
    return;
  }
  for (Tree& child : node.children) fill_sites(child, subs, next);
}

}  // namespace

std::pair<Derivation, Rational> most_probable_derivation(
    const DerivationForest& forest) {
  check_forest(forest);
  if (!forest.has_parse()) throw NoParse("empty goal entry: sentence has no parse");
  const Stsg& g = *forest.grammar;

  std::vector<Mark> mark(forest.entries.size(), Mark::Fresh);
  std::vector<Choice> memo(forest.entries.size());
  std::function<const Choice&(int)> best = [&](int id) -> const Choice& {
    Mark& m = mark[static_cast<std::size_t>(id)];
    if (m == Mark::Active) throw cyclic();
    if (m == Mark::Done) return memo[static_cast<std::size_t>(id)];
    m = Mark::Active;
    Choice winner;
    bool first = true;
    for (const ForestEdge& edge : forest.entry(id).edges) {
      const Stsg::Elementary& e = g.at(edge.tree_id);
      Choice candidate;
      candidate.prob = e.prob;
      candidate.seq.push_back(edge.tree_id);
      std::vector<const Tree*> subs;
      subs.reserve(edge.children.size());
      for (int child : edge.children) {
        const Choice& sub = best(child);
        candidate.prob *= sub.prob;
        candidate.seq.insert(candidate.seq.end(), sub.seq.begin(), sub.seq.end());
        subs.push_back(&sub.tree);
      }
      candidate.tree = e.tree;
      std::size_t next = 0;
      fill_sites(candidate.tree, subs, next);
      candidate.key = serialize_tree(candidate.tree);
      if (first || preferred(candidate, winner)) {
        winner = std::move(candidate);
        first = false;
      }
    }
    memo[static_cast<std::size_t>(id)] = std::move(winner);
    m = Mark::Done;
    return memo[static_cast<std::size_t>(id)];
  };

  const Choice& top = best(forest.goal);
  Derivation steps;
  steps.reserve(top.seq.size());
  for (int tree_id : top.seq) steps.push_back(g.at(tree_id).tree);
  return {std::move(steps), top.prob};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Derivation sample_derivation(const DerivationForest& forest,
                             const InsideMasses& masses, SampleRng& rng) {
  check_forest(forest);
  if (!forest.has_parse()) throw NoParse("empty goal entry: sentence has no parse");
  if (masses.mass.size() != forest.entries.size())
    throw Error("inside masses do not match the forest");
  const Stsg& g = *forest.grammar;

  Derivation steps;
  std::function<void(int)> visit = [&](int id) {
    const ForestEntry& entry = forest.entry(id);
    double u = rng.uniform() * masses.mass[static_cast<std::size_t>(id)];
    const ForestEdge* picked = &entry.edges.back();
    for (const ForestEdge& edge : entry.edges) {
      double w = g.at(edge.tree_id).weight;
      for (int child : edge.children)
        w *= masses.mass[static_cast<std::size_t>(child)];
      if (u < w) {
        picked = &edge;
        break;
      }
      u -= w;
    }
    steps.push_back(g.at(picked->tree_id).tree);
    for (int child : picked->children) visit(child);
  };
  visit(forest.goal);
  return steps;
}

namespace {

// Replicates bottom-up elimination: every entry commits to a single edge
// (weighted by the committed masses below it) before any parent chooses;
// the sample is the goal's committed derivation.
Derivation sample_bottom_up(const DerivationForest& forest, SampleRng& rng) {
  const Stsg& g = *forest.grammar;
  const std::vector<int> order = bottom_up_order(forest);
  std::vector<double> committed(forest.entries.size(), 0.0);
  std::vector<int> chosen(forest.entries.size(), -1);
  for (int id : order) {
    const ForestEntry& entry = forest.entry(id);
    std::vector<double> weights;
    weights.reserve(entry.edges.size());
    double total = 0.0;
    for (const ForestEdge& edge : entry.edges) {
      double w = g.at(edge.tree_id).weight;
      for (int child : edge.children)
        w *= committed[static_cast<std::size_t>(child)];
      weights.push_back(w);
      total += w;
    }
    double u = rng.uniform() * total;
    std::size_t pick = entry.edges.size() - 1;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (u < weights[k]) {
        pick = k;
        break;
      }
      u -= weights[k];
    }
    chosen[static_cast<std::size_t>(id)] = static_cast<int>(pick);
    committed[static_cast<std::size_t>(id)] = weights[pick];
  }

  Derivation steps;
  std::function<void(int)> emit = [&](int id) {
    const ForestEdge& edge =
        forest.entry(id).edges[static_cast<std::size_t>(
            chosen[static_cast<std::size_t>(id)])];
    steps.push_back(g.at(edge.tree_id).tree);
    for (int child : edge.children) emit(child);
  };
  emit(forest.goal);
  return steps;
}

}  // namespace

double ParseDistribution::estimate(const std::string& key) const {
  auto it = counts.find(key);
  if (it == counts.end() || samples < 1) return 0.0;
  return static_cast<double>(it->second.count) / static_cast<double>(samples);
}

std::int64_t samples_for_sigma(double sigma_max) {
  if (!(sigma_max > 0.0) || sigma_max > 0.5)
    throw Error("sigma bound must lie in (0, 0.5]");
  const double needed = 1.0 / (4.0 * sigma_max * sigma_max);
  const auto n = static_cast<std::int64_t>(std::ceil(needed));
  return n < 1 ? 1 : n;
}

ParseDistribution estimate_parse_distribution(const DerivationForest& forest,
                                              const InsideMasses& masses,
                                              std::int64_t samples,
                                              std::uint64_t seed,
                                              SamplingScheme scheme) {
  check_forest(forest);
  if (samples < 1) throw Error("sample count must be positive");
  if (!forest.has_parse()) throw NoParse("empty goal entry: sentence has no parse");

  ParseDistribution dist;
  dist.samples = samples;
  dist.seed = seed;
  dist.sigma_bound = 1.0 / (2.0 * std::sqrt(static_cast<double>(samples)));
  for (std::int64_t i = 0; i < samples; ++i) {
    SampleRng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    Derivation steps = scheme == SamplingScheme::TopDown
                           ? sample_derivation(forest, masses, rng)
                           : sample_bottom_up(forest, rng);
    Tree parse = derive(steps);
    std::string key = serialize_tree(parse);
    auto it = dist.counts.find(key);
    if (it == dist.counts.end())
      dist.counts.emplace(std::move(key),
                          ParseDistribution::Item{std::move(parse), 1});
    else
      ++it->second.count;
  }
  return dist;
}

ParseDistribution estimate_parse_distribution(const DerivationForest& forest,
                                              const InsideMasses& masses,
                                              double sigma_max,
                                              std::uint64_t seed,
                                              SamplingScheme scheme) {
  return estimate_parse_distribution(forest, masses, samples_for_sigma(sigma_max),
                                     seed, scheme);
}

std::vector<Tree> select_top_parses(const ParseDistribution& dist,
                                    double tie_width) {
  if (dist.samples < 1) throw Error("distribution has no samples");
  if (tie_width < 0.0) throw Error("tie width must be >= 0");
  std::int64_t max_count = 0;
  for (const auto& [key, item] : dist.counts)
    max_count = std::max(max_count, item.count);
  const double limit =
      tie_width * static_cast<double>(dist.samples) + 1e-9;

  std::vector<std::pair<std::int64_t, const ParseDistribution::Item*>> kept;
  for (const auto& [key, item] : dist.counts)
    if (static_cast<double>(max_count - item.count) <= limit)
      kept.emplace_back(item.count, &item);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Tree> out;
  out.reserve(kept.size());
  for (const auto& [count, item] : kept) out.push_back(item->tree);
  return out;
}

std::vector<std::pair<Tree, Rational>> exact_parse_masses(
    const DerivationForest& forest, std::int64_t cap) {
  std::map<std::string, std::pair<Tree, Rational>> grouped;
  for (const auto& [steps, prob] : unpack_forest(forest, cap)) {
    Tree parse = derive(steps);
    std::string key = serialize_tree(parse);
    auto it = grouped.find(key);
    if (it == grouped.end())
      grouped.emplace(std::move(key), std::make_pair(std::move(parse), prob));
    else
      it->second.second += prob;
  }
  std::vector<std::pair<Tree, Rational>> out;
  out.reserve(grouped.size());
  for (auto& [key, pair] : grouped) out.push_back(std::move(pair));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

double mc_error_bound(const std::vector<double>& p, std::int64_t n) {
  if (p.empty()) throw Error("mc_error_bound needs a non-empty distribution");
  const double top = std::sqrt(p.front());
  double sum = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double gap = top - std::sqrt(p[i]);
    sum += std::pow(1.0 - gap * gap, static_cast<double>(n));
  }
  return sum;
}

std::string distribution_to_tsv(const ParseDistribution& dist) {
  std::ostringstream out;
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.10g", dist.sigma_bound);
  out << "# samples: " << dist.samples << " seed: " << dist.seed
      << " sigma-bound: " << buffer << '\n';

  std::vector<const std::pair<const std::string, ParseDistribution::Item>*> rows;
  rows.reserve(dist.counts.size());
  for (const auto& entry : dist.counts) rows.push_back(&entry);
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return a->second.count > b->second.count;
  });
  for (const auto* row : rows) {
    std::snprintf(buffer, sizeof buffer, "%.10g",
                  static_cast<double>(row->second.count) /
                      static_cast<double>(dist.samples));
    out << row->first << '\t' << row->second.count << '\t' << buffer << '\n';
  }
  return out.str();
}

}  // namespace dop
