#include "maxagree/oracle.hpp"

#include <algorithm>
#include <set>

namespace maxagree {

Rat tv_by_event_enumeration(const ProcessLaw& law1, const ProcessLaw& law2, int t) {
    require_compatible(law1, law2);
    if (t < 0 || t > law1.horizon)
        throw LevelError("time index out of horizon range");
    PathMeasure m1 = restrict(law1.paths, t);
    PathMeasure m2 = restrict(law2.paths, t);
    std::set<Path> support;
    for (const auto& [path, mass] : m1.atoms()) {
        (void)mass;
        support.insert(path);
    }
    for (const auto& [path, mass] : m2.atoms()) {
        (void)mass;
        support.insert(path);
    }
    if (support.size() > 20)
        throw CapExceeded("event enumeration over " + std::to_string(support.size()) +
                          " prefixes exceeds the 2^20 cap");
    std::vector<Rat> delta;
    delta.reserve(support.size());
    for (const Path& path : support)
        delta.push_back(m1.mass(path) - m2.mass(path));

    // Gray-code walk over every event; one atom flips per step.
    const std::size_t k = delta.size();
    std::vector<bool> in_event(k, false);
    Rat value = 0, best = 0;
    const unsigned long long count = 1ULL << k;
    for (unsigned long long i = 1; i < count; ++i) {
        unsigned long long bit = 0;
        while (((i >> bit) & 1ULL) == 0)
            ++bit;
        if (in_event[bit]) {
            value -= delta[bit];
            in_event[bit] = false;
        } else {
            value += delta[bit];
            in_event[bit] = true;
        }
        if (value > best)
            best = value;
    }
    return best;
}

Rat kappa_by_subset_enumeration(const ProcessLaw& law1, const ProcessLaw& law2, int t) {
    require_compatible(law1, law2);
    if (t < 0 || t > law1.horizon)
        throw LevelError("time index out of horizon range");
    const int n = law1.alphabet.size();
    if (n > 12)
        throw CapExceeded("subset enumeration over an alphabet of size " +
                          std::to_string(n) + " exceeds the cap");

    PathMeasure h1 = restrict(law1.paths, t - 1);
    PathMeasure h2 = restrict(law2.paths, t - 1);
    PathMeasure n1 = restrict(law1.paths, t);
    PathMeasure n2 = restrict(law2.paths, t);

    bool have = false;
    Rat min_ratio = 0;
    for (const auto& [z, z1] : h1.atoms()) {
        Rat z2 = h2.mass(z);
        std::vector<Rat> p1(static_cast<std::size_t>(n), Rat(0));
        std::vector<Rat> p2(static_cast<std::size_t>(n), Rat(0));
        Path child = z;
        child.push_back(0);
        for (int e = 0; e < n; ++e) {
            child.back() = e;
            p1[static_cast<std::size_t>(e)] = n1.mass(child) / z1;
            p2[static_cast<std::size_t>(e)] = z2 == 0 ? Rat(0) : n2.mass(child) / z2;
        }
        for (unsigned long long mask = 1; mask < (1ULL << n); ++mask) {
            Rat s1 = 0, s2 = 0;
            for (int e = 0; e < n; ++e) {
                if ((mask >> e) & 1ULL) {
                    s1 += p1[static_cast<std::size_t>(e)];
                    s2 += p2[static_cast<std::size_t>(e)];
                }
            }
            if (s1 == 0)
                continue;
            Rat ratio = s2 / s1;
            if (!have || ratio < min_ratio) {
                min_ratio = ratio;
                have = true;
            }
        }
    }
    if (!have)
        throw InternalError("no admissible subset in the hazard domain");
    return Rat(1) - (min_ratio < 1 ? min_ratio : Rat(1));
}

IndependenceReport independence_by_joint_enumeration(const ExtendedCoupling& ec) {
    std::set<Path> paths;
    std::set<TauValue> taus;
    std::map<std::pair<Path, TauValue>, Rat> table;
    std::map<Path, Rat> row_total;
    std::map<TauValue, Rat> col_total;
    Rat total = 0;
    for (const auto& [key, mass] : ec.atoms) {
        const auto& [p1, p2, tau] = key;
        (void)p2;
        paths.insert(p1);
        taus.insert(tau);
        table[{p1, tau}] += mass;
        row_total[p1] += mass;
        col_total[tau] += mass;
        total += mass;
    }
    if (paths.size() * taus.size() > 4096)
        throw CapExceeded("joint table with " +
                          std::to_string(paths.size() * taus.size()) +
                          " cells exceeds the cap");
    IndependenceReport report;
    for (const Path& p : paths) {
        for (const TauValue& tau : taus) {
            auto it = table.find({p, tau});
            Rat cell = it == table.end() ? Rat(0) : it->second;
            if (cell * total != row_total[p] * col_total[tau]) {
                report.independent = false;
                report.violating_cell =
                    "(path '" + format_path(ec.base.law1.alphabet, p) + "', tau " +
                    format_sigma(tau) + "): joint " + format_rational(cell / total) +
                    " vs product " +
                    format_rational(row_total[p] * col_total[tau] / (total * total));
                return report;
            }
        }
    }
    return report;
}

std::map<int, Rat> agreement_upper_bound(const ProcessLaw& law1, const ProcessLaw& law2) {
    require_compatible(law1, law2);
    std::map<int, Rat> out;
    for (int t = 0; t <= law1.horizon; ++t)
        out.emplace(t, total_mass(meet(restrict(law1.paths, t), restrict(law2.paths, t))));
    return out;
}

} // namespace maxagree
