#pragma once

#include <map>
#include <string>
#include <vector>

#include "maxagree/tau.hpp"

namespace maxagree {

/// Brute-force reference implementations, deliberately sharing no logic
/// with the primary code paths beyond the measure type. Exponential cost;
/// hard caps throw CapExceeded instead of degrading silently.

class CapExceeded : public Error {
public:
    using Error::Error;
};

/// sup over all events A of level-(t+1) prefixes of law1(A) - law2(A),
/// enumerated literally. Cap: at most 20 prefixes in the support union.
Rat tv_by_event_enumeration(const ProcessLaw& law1, const ProcessLaw& law2, int t);

/// Hazard via full subset enumeration: 1 - min over law1-positive
/// histories z and nonempty B with law1(Z_t in B | z) > 0 of
/// law2(Z_t in B | z) / law1(Z_t in B | z). Cap: alphabet size <= 12.
Rat kappa_by_subset_enumeration(const ProcessLaw& law1, const ProcessLaw& law2, int t);

struct IndependenceReport {
    bool independent = true;
    std::string violating_cell; // empty when independent
};

/// Materializes the complete (Z1 path x tau) table and checks exact
/// factorization cell by cell. Cap: at most 4096 cells.
IndependenceReport independence_by_joint_enumeration(const ExtendedCoupling& ec);

/// t -> 1 - TV over coordinates 0..t: the ceiling every coupling's
/// P(sigma > t) must respect.
std::map<int, Rat> agreement_upper_bound(const ProcessLaw& law1, const ProcessLaw& law2);

} // namespace maxagree
