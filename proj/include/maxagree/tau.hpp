#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "maxagree/coupling.hpp"

namespace maxagree {

/// Hazard data for one time index.
struct HazardEntry {
    int t = 0;
    /// Worst-case one-step likelihood-ratio hazard of the two laws.
    Rat formula;
    /// Conditional hazards of an actual coupling, per level-(t+1) prefix z:
    /// mass(sigma = t, Z1 prefix z) / mass(sigma >= t, Z1 prefix z).
    std::map<Path, Rat> conditional;
    Rat max_conditional;
    /// Effective hazard used for thinning: max(formula, max_conditional).
    Rat effective;
    /// Whether max_conditional <= formula (holds by construction for
    /// recursive-mode couplings; recorded per instance for direct mode).
    bool within_formula = true;
};

struct HazardProfile {
    std::vector<HazardEntry> per_t;
};

/// Coupling extended with the decoupling lower bound tau.
/// Atom key: (path1, path2, tau); sigma is implied by the path pair.
struct ExtendedCoupling {
    LayeredCoupling base;
    std::map<std::tuple<Path, Path, TauValue>, Rat> atoms;
    HazardProfile hazards;
};

/// kappa_t = 1 - min over level-t histories z with positive law1 mass and
/// symbols e with law1(e|z) > 0 of law2(e|z) / law1(e|z). A history with
/// law2 mass 0 forces kappa_t = 1. Computed over singletons; the subset
/// form agrees by the mediant inequality (ratio of sums >= min atom ratio).
Rat kappa(const ProcessLaw& law1, const ProcessLaw& law2, int t);

/// Formula hazards plus the coupling's conditional hazards and the
/// effective values, for t = 0..T.
HazardProfile kappa_profile(const LayeredCoupling& c);

/// Attaches tau to every atom through per-time thinning bits: at the
/// disagreement time the bit fires surely; before it the no-fire weight is
/// compensated by (1 - effective) / (1 - conditional at the Z1 prefix);
/// after it the bit is plain Bernoulli(effective). tau is the first firing
/// time, BEYOND when no bit fires in 0..T. Projecting out tau returns the
/// base coupling exactly, and tau <= sigma on every atom.
ExtendedCoupling extend_with_tau(const LayeredCoupling& c);

struct TauReport {
    bool independent = true;           // (Z1, tau) joint factorizes exactly
    std::optional<std::tuple<Path, TauValue, Rat, Rat>> independence_counterexample;
    bool tau_le_sigma = true;          // atomwise
    bool hazard_identity = true;       // P(tau = t | tau >= t) = effective_t
    bool survival_product = true;      // P(tau > t) = prod_{s<=t}(1 - effective_s)
    bool beyond_consistent = true;     // P(tau = BEYOND) > 0 iff all effective_t < 1
    bool effective_equals_formula = true; // per-instance flag, not a failure
    std::map<TauValue, Rat> tau_distribution;
    std::vector<Rat> survival;         // P(tau > t), t = 0..T
    bool passed() const {
        return independent && tau_le_sigma && hazard_identity && survival_product &&
               beyond_consistent;
    }
};

TauReport verify_tau(const ExtendedCoupling& ec);

/// Worst-case one-step conditionals and the two hazard bounds they give.
struct CountableBounds {
    Rat delta1; // min over law1-positive (z, e) of law1(e|z)
    Rat delta2; // min over the same domain of law2(e|z)
    Rat bound_a; // 1 - delta2
    Rat bound_b; // delta1^{-1} * max over (z, e) of (law2(e|z) - law1(e|z))
    Rat kappa_value;
    bool kappa_le_a = true;
    bool kappa_le_b = true;
};

CountableBounds countable_bounds(const ProcessLaw& law1, const ProcessLaw& law2, int t);

/// Alternative index readings of the delta bounds, reported for comparison.
struct CountableBoundsAlternatives {
    /// Per t, with histories one symbol shorter (length t-1, marginalizing
    /// out time t-1); undefined at t = 0.
    std::vector<std::optional<CountableBounds>> off_by_one;
    /// Single time-uniform bounds over all t = 0..T; kappa_value is the
    /// largest per-time hazard.
    CountableBounds uniform;
};

CountableBoundsAlternatives countable_bounds_alternatives(const ProcessLaw& law1,
                                                          const ProcessLaw& law2);

} // namespace maxagree
