#pragma once

#include <map>
#include <string>
#include <vector>

#include "maxagree/measure.hpp"

namespace maxagree {

/// Full-horizon process law: a probability measure on paths of length
/// horizon+1 (times 0..horizon). Total mass is exactly 1.
struct ProcessLaw {
    Alphabet alphabet;
    int horizon;
    PathMeasure paths;
};

/// Time-homogeneous Markov chain data on a state space of its own; the
/// chain's path law lives on `states`, not necessarily on a target alphabet.
struct MarkovSpec {
    Alphabet states;
    std::vector<Rat> initial;            // indexed by state, sums to 1
    std::vector<std::vector<Rat>> kernel; // row-stochastic, kernel[i][j] = P(i -> j)
    int horizon;
};

/// Total map from underlying states to alphabet symbols.
struct CoarseGrainMap {
    Alphabet source;
    Alphabet target;
    std::vector<int> image; // image[source index] = target index
};

/// Validated explicit law. Throws ValidationError on wrong path lengths,
/// negative masses, or total != 1.
ProcessLaw law_from_table(const Alphabet& alphabet, int horizon,
                          const std::vector<std::pair<Path, Rat>>& entries);

/// Product law with one fixed step distribution (indexed by symbol).
ProcessLaw law_iid(const Alphabet& alphabet, int horizon, const std::vector<Rat>& step);

/// Path law of the chain: initial(z_0) * prod kernel(z_{s-1}, z_s).
ProcessLaw law_markov(const MarkovSpec& spec);

/// Image law of Z_t = phi(X_t): mass of an image path is the sum over its
/// preimage class. Preserves total mass.
ProcessLaw pushforward(const ProcessLaw& law, const CoarseGrainMap& phi);

/// Both laws of an instance, sharing alphabet and horizon.
struct Instance {
    ProcessLaw law1;
    ProcessLaw law2;
};

/// Throws ValidationError unless the two laws share alphabet and horizon.
void require_compatible(const ProcessLaw& law1, const ProcessLaw& law2);

} // namespace maxagree
