#include "maxagree/tau.hpp"

#include <algorithm>

namespace maxagree {

namespace {

void check_internal(bool condition, const std::string& message) {
    if (!condition)
        throw InternalError(message);
}

/// Mass of {Z prefix = z, Z_t = e} for histories z of length <= t.
/// Returned per symbol e, alongside the history mass itself.
struct SymbolSlice {
    Rat history_mass;
    std::vector<Rat> symbol_mass;
};

SymbolSlice symbol_slice(const ProcessLaw& law, const Path& z, int t) {
    SymbolSlice slice{Rat(0), std::vector<Rat>(static_cast<std::size_t>(law.alphabet.size()),
                                               Rat(0))};
    PathMeasure next = restrict(law.paths, t);
    for (const auto& [w, mass] : next.atoms()) {
        if (!std::equal(z.begin(), z.end(), w.begin()))
            continue;
        slice.history_mass += mass;
        slice.symbol_mass[static_cast<std::size_t>(w[static_cast<std::size_t>(t)])] += mass;
    }
    return slice;
}

/// Domain of the hazard minimization at time t with histories of length
/// history_len <= t: all law1-positive histories.
std::vector<Path> positive_histories(const ProcessLaw& law, int history_len) {
    std::vector<Path> out;
    PathMeasure lev = restrict(law.paths, history_len - 1);
    out.reserve(lev.atoms().size());
    for (const auto& [z, mass] : lev.atoms()) {
        (void)mass;
        out.push_back(z);
    }
    return out;
}

Rat kappa_with_history_len(const ProcessLaw& law1, const ProcessLaw& law2, int t,
                           int history_len) {
    bool have_ratio = false;
    Rat min_ratio = 0;
    for (const Path& z : positive_histories(law1, history_len)) {
        SymbolSlice s1 = symbol_slice(law1, z, t);
        SymbolSlice s2 = symbol_slice(law2, z, t);
        for (int e = 0; e < law1.alphabet.size(); ++e) {
            const Rat& m1 = s1.symbol_mass[static_cast<std::size_t>(e)];
            if (m1 == 0)
                continue;
            // law2(e|z) / law1(e|z); a law2-null history makes the ratio 0.
            Rat ratio = s2.history_mass == 0
                            ? Rat(0)
                            : (s2.symbol_mass[static_cast<std::size_t>(e)] / s2.history_mass) /
                                  (m1 / s1.history_mass);
            if (!have_ratio || ratio < min_ratio) {
                min_ratio = ratio;
                have_ratio = true;
            }
        }
    }
    check_internal(have_ratio, "no positive one-step conditional in the hazard domain");
    return Rat(1) - (min_ratio < 1 ? min_ratio : Rat(1));
}

CountableBounds bounds_with_history_len(const ProcessLaw& law1, const ProcessLaw& law2,
                                        int t, int history_len) {
    CountableBounds out;
    bool have = false;
    Rat max_diff = 0;
    for (const Path& z : positive_histories(law1, history_len)) {
        SymbolSlice s1 = symbol_slice(law1, z, t);
        SymbolSlice s2 = symbol_slice(law2, z, t);
        for (int e = 0; e < law1.alphabet.size(); ++e) {
            Rat p1 = s1.symbol_mass[static_cast<std::size_t>(e)] / s1.history_mass;
            Rat p2 = s2.history_mass == 0
                         ? Rat(0)
                         : s2.symbol_mass[static_cast<std::size_t>(e)] / s2.history_mass;
            Rat diff = p2 - p1;
            if (!have && p1 > 0) {
                out.delta1 = p1;
                out.delta2 = p2;
                have = true;
            } else if (p1 > 0) {
                if (p1 < out.delta1) out.delta1 = p1;
                if (p2 < out.delta2) out.delta2 = p2;
            }
            if (diff > max_diff) max_diff = diff;
        }
    }
    check_internal(have, "no positive one-step conditional in the bound domain");
    out.bound_a = Rat(1) - out.delta2;
    out.bound_b = max_diff / out.delta1;
    out.kappa_value = kappa_with_history_len(law1, law2, t, history_len);
    out.kappa_le_a = out.kappa_value <= out.bound_a;
    out.kappa_le_b = out.kappa_value <= out.bound_b;
    return out;
}

template <typename Key>
Rat atom_mass_or_zero(const std::map<Key, Rat>& m, const Key& key) {
    auto it = m.find(key);
    return it == m.end() ? Rat(0) : it->second;
}

} // namespace

Rat kappa(const ProcessLaw& law1, const ProcessLaw& law2, int t) {
    require_compatible(law1, law2);
    if (t < 0 || t > law1.horizon)
        throw LevelError("time index out of horizon range");
    return kappa_with_history_len(law1, law2, t, t);
}

HazardProfile kappa_profile(const LayeredCoupling& c) {
    const int T = c.law1.horizon;
    HazardProfile profile;
    // Side-1 prefix masses of {sigma = t} and {sigma >= t} per level-(t+1)
    // prefix, scanned once over the layers.
    std::vector<std::map<Path, Rat>> at(static_cast<std::size_t>(T + 1));
    std::vector<std::map<Path, Rat>> from(static_cast<std::size_t>(T + 1));
    for (const auto& [s, layer] : c.layers) {
        for (const auto& [pair, mass] : layer) {
            for (int t = 0; t <= T; ++t) {
                if (!s.is_beyond() && s.time() < t)
                    break;
                Path z(pair.first.begin(), pair.first.begin() + t + 1);
                from[static_cast<std::size_t>(t)][z] += mass;
                if (!s.is_beyond() && s.time() == t)
                    at[static_cast<std::size_t>(t)][z] += mass;
            }
        }
    }
    for (int t = 0; t <= T; ++t) {
        HazardEntry entry;
        entry.t = t;
        entry.formula = kappa(c.law1, c.law2, t);
        entry.max_conditional = 0;
        for (const auto& [z, denom] : from[static_cast<std::size_t>(t)]) {
            Rat ratio = atom_mass_or_zero(at[static_cast<std::size_t>(t)], z) / denom;
            entry.conditional.emplace(z, ratio);
            if (ratio > entry.max_conditional)
                entry.max_conditional = ratio;
        }
        entry.effective = std::max(entry.formula, entry.max_conditional);
        entry.within_formula = entry.max_conditional <= entry.formula;
        profile.per_t.push_back(std::move(entry));
    }
    return profile;
}

ExtendedCoupling extend_with_tau(const LayeredCoupling& c) {
    const int T = c.law1.horizon;
    ExtendedCoupling ec{c, {}, kappa_profile(c)};
    for (const auto& [s, layer] : c.layers) {
        for (const auto& [pair, mass] : layer) {
            Rat carry = mass;
            for (int t = 0; t <= T; ++t) {
                const HazardEntry& h = ec.hazards.per_t[static_cast<std::size_t>(t)];
                Rat no_fire;
                if (!s.is_beyond() && s.time() == t) {
                    no_fire = 0;
                } else if (s.is_beyond() || s.time() > t) {
                    // Still agreeing at t: compensate so that the overall
                    // firing rate is exactly the effective hazard.
                    Path z(pair.first.begin(), pair.first.begin() + t + 1);
                    auto it = h.conditional.find(z);
                    check_internal(it != h.conditional.end() && it->second < 1,
                                   "agreeing atom at a prefix with hazard 1, t=" +
                                       std::to_string(t) + " z='" +
                                       format_path(c.law1.alphabet, z) + "'");
                    no_fire = (Rat(1) - h.effective) / (Rat(1) - it->second);
                } else {
                    no_fire = Rat(1) - h.effective;
                }
                check_internal(no_fire >= 0 && no_fire <= 1,
                               "thinning weight outside [0,1] at t=" + std::to_string(t));
                Rat fire_mass = carry * (Rat(1) - no_fire);
                if (fire_mass > 0)
                    ec.atoms[{pair.first, pair.second, TauValue::at(t)}] += fire_mass;
                carry *= no_fire;
                if (carry == 0)
                    break;
            }
            if (carry > 0)
                ec.atoms[{pair.first, pair.second, TauValue::beyond()}] += carry;
        }
    }
    return ec;
}

TauReport verify_tau(const ExtendedCoupling& ec) {
    const int T = ec.base.law1.horizon;
    TauReport report;

    // Joint (Z1 path, tau) table, tau marginal, Z1 marginal, base projection.
    std::map<Path, std::map<TauValue, Rat>> joint;
    std::map<TauValue, Rat> tau_marginal;
    std::map<Path, Rat> z1_marginal;
    std::map<PathPair, Rat> projected;
    Rat total = 0;
    for (const auto& [key, mass] : ec.atoms) {
        const auto& [p1, p2, tau] = key;
        joint[p1][tau] += mass;
        tau_marginal[tau] += mass;
        z1_marginal[p1] += mass;
        projected[{p1, p2}] += mass;
        total += mass;
        SigmaValue sigma = first_disagreement(p1, p2);
        if (sigma < tau)
            report.tau_le_sigma = false;
    }
    report.tau_distribution = tau_marginal;

    std::map<PathPair, Rat> base_atoms;
    for (const auto& [s, layer] : ec.base.layers) {
        (void)s;
        for (const auto& [pair, mass] : layer)
            base_atoms[pair] += mass;
    }
    check_internal(projected == base_atoms,
                   "extended atoms do not project back to the base coupling");

    for (const auto& [p1, p1_mass] : z1_marginal) {
        for (const auto& [tau, tau_mass] : tau_marginal) {
            Rat cell = atom_mass_or_zero<TauValue>(joint[p1], tau);
            if (cell * total != p1_mass * tau_mass) {
                report.independent = false;
                if (!report.independence_counterexample) {
                    report.independence_counterexample = {
                        p1, tau, cell / total, p1_mass * tau_mass / (total * total)};
                }
            }
        }
    }

    // Hazard identity and survival products against the effective hazards.
    Rat at_least = total; // P(tau >= t), running
    Rat survival_expected = 1;
    for (int t = 0; t <= T; ++t) {
        const Rat effective = ec.hazards.per_t[static_cast<std::size_t>(t)].effective;
        Rat fired = atom_mass_or_zero(tau_marginal, TauValue::at(t));
        if (at_least > 0 && fired != effective * at_least)
            report.hazard_identity = false;
        at_least -= fired;
        survival_expected *= Rat(1) - effective;
        report.survival.push_back(at_least);
        if (at_least != survival_expected * total)
            report.survival_product = false;
        if (ec.hazards.per_t[static_cast<std::size_t>(t)].effective !=
            ec.hazards.per_t[static_cast<std::size_t>(t)].formula)
            report.effective_equals_formula = false;
    }
    bool all_below_one = true;
    for (const HazardEntry& h : ec.hazards.per_t)
        if (h.effective >= 1)
            all_below_one = false;
    Rat beyond = atom_mass_or_zero(tau_marginal, TauValue::beyond());
    report.beyond_consistent = (beyond > 0) == all_below_one;
    return report;
}

CountableBounds countable_bounds(const ProcessLaw& law1, const ProcessLaw& law2, int t) {
    require_compatible(law1, law2);
    if (t < 0 || t > law1.horizon)
        throw LevelError("time index out of horizon range");
    return bounds_with_history_len(law1, law2, t, t);
}

CountableBoundsAlternatives countable_bounds_alternatives(const ProcessLaw& law1,
                                                          const ProcessLaw& law2) {
    require_compatible(law1, law2);
    CountableBoundsAlternatives out;
    for (int t = 0; t <= law1.horizon; ++t) {
        if (t == 0)
            out.off_by_one.push_back(std::nullopt);
        else
            out.off_by_one.push_back(bounds_with_history_len(law1, law2, t, t - 1));
    }
    bool first = true;
    CountableBounds uniform;
    Rat max_diff = 0;
    for (int t = 0; t <= law1.horizon; ++t) {
        CountableBounds here = countable_bounds(law1, law2, t);
        Rat diff_here = here.bound_b * here.delta1;
        if (first) {
            uniform = here;
            max_diff = diff_here;
            first = false;
            continue;
        }
        uniform.delta1 = std::min(uniform.delta1, here.delta1);
        uniform.delta2 = std::min(uniform.delta2, here.delta2);
        uniform.kappa_value = std::max(uniform.kappa_value, here.kappa_value);
        max_diff = std::max(max_diff, diff_here);
    }
    uniform.bound_a = Rat(1) - uniform.delta2;
    uniform.bound_b = max_diff / uniform.delta1;
    uniform.kappa_le_a = uniform.kappa_value <= uniform.bound_a;
    uniform.kappa_le_b = uniform.kappa_value <= uniform.bound_b;
    out.uniform = uniform;
    return out;
}

} // namespace maxagree
