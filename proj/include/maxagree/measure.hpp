#pragma once

#include <map>
#include <string>
#include <vector>

#include "maxagree/errors.hpp"
#include "maxagree/rational.hpp"

namespace maxagree {

/// Finite ordered state space. Symbols are non-empty, unique, and must not
/// contain ',' (paths serialize as comma-joined symbol lists).
class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols);

    int size() const { return static_cast<int>(symbols_.size()); }
    const std::string& label(int i) const;
    /// Index of a symbol; throws ValidationError for unknown labels.
    int index(const std::string& symbol) const;

    const std::vector<std::string>& symbols() const { return symbols_; }
    bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }
    bool operator!=(const Alphabet& other) const { return !(*this == other); }

private:
    std::vector<std::string> symbols_;
    std::map<std::string, int> index_;
};

/// A path prefix: sequence of alphabet indices. Length L covers times 0..L-1;
/// the empty path is the sole level-0 prefix.
using Path = std::vector<int>;

/// "a,b,a" -> {0,1,0}. Empty string parses to the empty path.
Path parse_path(const Alphabet& alphabet, const std::string& text);
std::string format_path(const Alphabet& alphabet, const Path& path);

/// Sparse nonnegative rational measure supported on prefixes of one fixed
/// length (the level). Zero-mass atoms are never stored. Value-semantic and
/// immutable by convention once built; all operations below are pure.
class PathMeasure {
public:
    PathMeasure(Alphabet alphabet, int level);

    const Alphabet& alphabet() const { return alphabet_; }
    int level() const { return level_; }
    const std::map<Path, Rat>& atoms() const { return atoms_; }

    /// Mass of one prefix; zero for absent atoms.
    Rat mass(const Path& prefix) const;
    Rat total() const;
    bool empty() const { return atoms_.empty(); }

    /// Accumulate mass onto a prefix. Validates length, index range and
    /// nonnegativity of the resulting atom; drops atoms that land on zero.
    void add(const Path& prefix, const Rat& mass);

    bool operator==(const PathMeasure& other) const;
    bool operator!=(const PathMeasure& other) const { return !(*this == other); }

private:
    Alphabet alphabet_;
    int level_;
    std::map<Path, Rat> atoms_;
};

Rat total_mass(const PathMeasure& m);

/// Push forward to the level-(t+1) prefix marginal by truncating atoms.
/// Requires t+1 <= m.level(); preserves total mass.
PathMeasure restrict(const PathMeasure& m, int t);

/// Atomwise minimum: the largest measure dominated by both arguments.
/// Requires equal alphabets and levels.
PathMeasure meet(const PathMeasure& m1, const PathMeasure& m2);

/// Atomwise difference m1 - m2; throws DominationError unless m2 <= m1.
PathMeasure subtract(const PathMeasure& m1, const PathMeasure& m2);

/// Atomwise scaling by a factor >= 0.
PathMeasure scale(const PathMeasure& m, const Rat& factor);

struct ProcessLaw;

/// One-step conditional distribution mu(Z_L = e | prefix z), L = len(z).
/// Entries indexed by alphabet symbol, summing to 1 exactly.
/// Throws ConditioningError when the prefix has zero mass under the law,
/// LevelError when the prefix already has full length.
std::vector<Rat> one_step_conditional(const ProcessLaw& law, const Path& z);

/// Spread each atom of m over its extensions at to_level, proportionally to
/// the law's conditional probabilities. Total mass is preserved and
/// restricting back to m's level returns m. Every atom of m must sit on a
/// prefix with positive law mass.
PathMeasure extend_proportional(const PathMeasure& m, const ProcessLaw& law, int to_level);

/// Total variation distance between the two laws over coordinates 0..t,
/// computed as 1 - |meet of the level-(t+1) restrictions|.
Rat tv_distance(const ProcessLaw& law1, const ProcessLaw& law2, int t);

} // namespace maxagree
