#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "maxagree/laws.hpp"

namespace maxagree {

/// First-disagreement value: a time in 0..T, or BEYOND for pairs that agree
/// on the whole observed window. BEYOND sorts after every finite time.
class SigmaValue {
public:
    static SigmaValue at(int t) {
        if (t < 0)
            throw InternalError("negative time in sigma value");
        return SigmaValue(t);
    }
    static SigmaValue beyond() { return SigmaValue(-1); }

    bool is_beyond() const { return t_ < 0; }
    /// Finite time; invalid on BEYOND.
    int time() const {
        if (is_beyond())
            throw InternalError("BEYOND has no finite time");
        return t_;
    }

    bool operator==(const SigmaValue& o) const { return t_ == o.t_; }
    bool operator!=(const SigmaValue& o) const { return t_ != o.t_; }
    bool operator<(const SigmaValue& o) const {
        if (is_beyond()) return false;
        if (o.is_beyond()) return true;
        return t_ < o.t_;
    }
    bool operator<=(const SigmaValue& o) const { return *this < o || *this == o; }

private:
    explicit SigmaValue(int t) : t_(t) {}
    int t_; // -1 encodes BEYOND
};

/// τ shares the value domain and ordering of σ.
using TauValue = SigmaValue;

std::string format_sigma(const SigmaValue& v);

/// First index where the two paths differ, BEYOND if they are equal.
/// Paths must have equal length.
SigmaValue first_disagreement(const Path& p1, const Path& p2);

enum class Mode { Direct, Recursive };

std::string format_mode(Mode mode);

/// Pair of full-length paths, the support point of one coupling atom.
using PathPair = std::pair<Path, Path>;

/// A coupling of two path laws, decomposed by the first-disagreement value.
/// Atoms live on full-length path pairs; layer sigma=t atoms agree through
/// t-1 and differ at t, BEYOND atoms are diagonal.
struct LayeredCoupling {
    ProcessLaw law1;
    ProcessLaw law2;
    Mode mode;
    std::map<SigmaValue, std::map<PathPair, Rat>> layers;
};

/// Trace of a construction run, kept for ladder invariant checks.
/// pi[t] is the level-(t+1) agreement measure, t = 0..T.
/// mu_bar[i][t] (t = 0..T+1) and mu_layer[i][t] (t = 0..T) are full-path
/// measures with mu_layer[i][t] = mu_bar[i][t] - mu_bar[i][t+1].
struct ConstructionLadder {
    Mode mode;
    std::vector<PathMeasure> pi;
    std::vector<std::vector<PathMeasure>> mu_bar;
    std::vector<std::vector<PathMeasure>> mu_layer;
};

struct BuildResult {
    LayeredCoupling coupling;
    ConstructionLadder ladder;
};

/// Layered coupling whose agreement prefix measure at every time t is the
/// meet of the two level-(t+1) law restrictions, so P(sigma > t) attains the
/// 1 - TV ceiling simultaneously for every t. Per-time decoupling deficits
/// are paired off-diagonally through one-step residual capacities;
/// continuations of earlier layers are carried by the leftover capacities,
/// which telescope exactly against the law marginals.
BuildResult build_direct_meet(const ProcessLaw& law1, const ProcessLaw& law2);

/// Layered coupling from the recursive ladder: at each time the remaining
/// mass is cut down to the meet of the current restrictions and re-extended
/// proportionally to the laws. Keeps law-conditional continuations inside
/// every layer (which the direct mode does not), at the price of an
/// agreement profile that can fall below the 1 - TV ceiling for t >= 1.
BuildResult build_recursive(const ProcessLaw& law1, const ProcessLaw& law2);

BuildResult build(const ProcessLaw& law1, const ProcessLaw& law2, Mode mode);

/// Per-layer total masses; sums to 1 on a valid coupling.
std::map<SigmaValue, Rat> sigma_distribution(const LayeredCoupling& c);

/// P(sigma > t) for t = 0..T, read off the layers.
std::vector<Rat> agreement_profile(const LayeredCoupling& c);

/// 1 - tv_distance(law1, law2, t) for t = 0..T: the ceiling any coupling's
/// P(sigma > t) must respect.
std::vector<Rat> agreement_ceiling(const ProcessLaw& law1, const ProcessLaw& law2);

struct CouplingReport {
    bool passed = true;
    std::vector<std::string> violations;
};

/// Structural and marginal verification: full-path marginals equal the two
/// laws exactly; every atom's paths match its layer's sigma value; masses
/// positive; levels correct. Reports every violation, never throws.
CouplingReport verify_coupling(const LayeredCoupling& c);

struct MaximalityEntry {
    int t = 0;
    Rat achieved;
    Rat ceiling;
    Rat shortfall;
    bool equal = false;
};

struct MaximalityReport {
    bool passed = true;
    std::vector<MaximalityEntry> per_t;
};

/// Compares the achieved agreement profile against the TV ceiling at every
/// t; passes iff equality holds for all t.
MaximalityReport verify_maximality(const LayeredCoupling& c);

struct ConditionalViolation {
    int side = 0; // 1 or 2
    int t = 0;
    Path prefix;
    std::string detail;
};

struct ConditionalReport {
    bool passed = true;
    std::vector<ConditionalViolation> violations;
};

/// Post-decoupling marginal check at time t: for each side i and each
/// level-(t+1) prefix z with positive mass on {Z^i prefix = z, sigma >= t},
/// the conditional law of the full Z^i path given that event must equal the
/// law's conditional given z, exactly.
ConditionalReport conditional_marginal_check(const LayeredCoupling& c, int t);

/// Runs the check for every t = 0..T and merges the reports.
ConditionalReport conditional_marginal_check_all(const LayeredCoupling& c);

/// Probability coupling of the conditional continuations law1(.|w1) and
/// law2(.|w2): atoms on full-path pairs extending (w1, w2), marginals equal
/// to the conditionals exactly. |w1| = |w2| >= 1.
using RecouplePolicy = std::function<std::map<PathPair, Rat>(
    const ProcessLaw& law1, const ProcessLaw& law2, const Path& w1, const Path& w2)>;

/// Product of the two conditional continuations.
std::map<PathPair, Rat> independent_product_policy(const ProcessLaw& law1,
                                                   const ProcessLaw& law2,
                                                   const Path& w1, const Path& w2);

/// Pairs equal continuation suffixes at the meet mass first, then couples
/// the leftovers as a normalized product.
std::map<PathPair, Rat> greedy_meet_policy(const ProcessLaw& law1,
                                           const ProcessLaw& law2,
                                           const Path& w1, const Path& w2);

/// Replaces the continuation beyond level t+1 of every sigma=t layer by the
/// policy's coupling of the law conditionals at the atom's prefix pair,
/// keeping the layer's level-(t+1) structure. BEYOND atoms are untouched.
/// Throws PolicyError if a policy block is not a coupling of the two
/// conditionals.
LayeredCoupling regraft(const LayeredCoupling& c, const RecouplePolicy& policy);

} // namespace maxagree
