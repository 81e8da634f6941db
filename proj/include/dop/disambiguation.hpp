#ifndef DOP_DISAMBIGUATION_HPP
#define DOP_DISAMBIGUATION_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dop/chart.hpp"
#include "dop/rational.hpp"
#include "dop/stsg.hpp"
#include "dop/tree.hpp"

namespace dop {

// Per-entry sum of the probabilities of all subderivations rooted there,
// indexed by forest entry id. mass(goal) is the sentence probability.
struct InsideMasses {
  std::vector<double> mass;
  double goal_mass = 0.0;
};

// Bottom-up inside pass in double precision. Throws
// GrammarError(CyclicForest) when the forest has a substitution cycle
// (the sums would diverge).
InsideMasses compute_inside(const DerivationForest& forest);

// Same recurrence with exact rationals, for desk-scale oracle checks.
std::vector<Rational> compute_inside_exact(const DerivationForest& forest);

// Viterbi over entries: the sentence derivation maximizing the product of
// elementary-tree probabilities, computed with exact rationals. Ties break
// deterministically by the derived tree's serialization, then by the
// elementary-tree id sequence. Throws NoParse on an empty goal and
// GrammarError(CyclicForest) on cyclic forests.
std::pair<Derivation, Rational> most_probable_derivation(
    const DerivationForest& forest);

// Deterministic seedable random source. Uniform doubles take the top 53
// bits of a mersenne-twister draw, so every platform produces the same
// stream for the same seed.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // in [0, 1)
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// Stateless seed mixer used to give every sample (and every worker) an
// independent, reproducible generator.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Draws one sentence derivation with probability P(d) / mass(goal): walks
// top-down from the goal, picking each edge with weight
// P(elementary) * product of child masses. Throws NoParse on empty goal.
Derivation sample_derivation(const DerivationForest& forest,
                             const InsideMasses& masses, SampleRng& rng);

// How samples are drawn. TopDown is the default and realizes the
// proportionality contract exactly. BottomUpElimination replicates the
// other published procedure: every entry commits to one edge, in bottom-up
// order, and the sample is read off the goal; kept for comparison runs
// without any claim of equivalence.
enum class SamplingScheme { TopDown, BottomUpElimination };

// Estimated distribution over parse trees for one sentence.
struct ParseDistribution {
  struct Item {
    Tree tree;
    std::int64_t count = 0;
  };

  std::map<std::string, Item> counts;  // serialized parse -> tally
  std::int64_t samples = 0;
  double sigma_bound = 0.0;  // 1 / (2 sqrt N)
  std::uint64_t seed = 0;

  double estimate(const std::string& key) const;
};

// Smallest sample count guaranteeing standard error <= sigma_max for a
// binomially distributed frequency: ceil(1 / (4 sigma_max^2)).
std::int64_t samples_for_sigma(double sigma_max);

// Draws `samples` derivations (sample i uses mix_seed(seed, i), so any
// partition of the work reproduces the same tallies), derives each to its
// parse tree, and tallies frequencies.
ParseDistribution estimate_parse_distribution(
    const DerivationForest& forest, const InsideMasses& masses,
    std::int64_t samples, std::uint64_t seed,
    SamplingScheme scheme = SamplingScheme::TopDown);
ParseDistribution estimate_parse_distribution(
    const DerivationForest& forest, const InsideMasses& masses,
    double sigma_max, std::uint64_t seed,
    SamplingScheme scheme = SamplingScheme::TopDown);

// All parses whose estimate lies within tie_width of the maximum, ordered
// by estimate (descending) then serialization. tie_width 0 is the forced
// choice: winners only, still plural on an exact tie.
std::vector<Tree> select_top_parses(const ParseDistribution& dist,
                                    double tie_width);

// Exact distribution over parse trees by unpacking the forest and grouping
// derivations by the tree they derive; (mass, tree) pairs ordered by mass
// descending then serialization. Throws CapExceeded like unpack_forest.
std::vector<std::pair<Tree, Rational>> exact_parse_masses(
    const DerivationForest& forest, std::int64_t cap = 100000);

// Upper bound on the chance that sampling N times misses the most probable
// parse: sum over i != 0 of (1 - (sqrt(p0) - sqrt(pi))^2)^N. `p` must be
// descending; the bound may exceed 1.
double mc_error_bound(const std::vector<double>& p, std::int64_t n);

// TSV report: "# samples: N seed: S sigma-bound: B" then one line per
// parse "serialized-tree<TAB>count<TAB>estimate", most frequent first.
std::string distribution_to_tsv(const ParseDistribution& dist);

}  // namespace dop

#endif  // DOP_DISAMBIGUATION_HPP
