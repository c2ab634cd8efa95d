#include "maxagree/coupling.hpp"

#include <algorithm>

namespace maxagree {

namespace {

void check_internal(bool condition, const std::string& message) {
    if (!condition)
        throw InternalError(message);
}

/// Level-L prefix masses of a law, L = 0..horizon+1.
PathMeasure law_level(const ProcessLaw& law, int level) {
    return restrict(law.paths, level - 1);
}

Rat layer_total(const std::map<PathPair, Rat>& layer) {
    Rat sum = 0;
    for (const auto& [pair, mass] : layer)
        sum += mass;
    return sum;
}

void add_layer(LayeredCoupling& c, const SigmaValue& s, std::map<PathPair, Rat> layer) {
    if (!layer.empty())
        c.layers.emplace(s, std::move(layer));
}

} // namespace

std::string format_sigma(const SigmaValue& v) {
    return v.is_beyond() ? "beyond" : std::to_string(v.time());
}

SigmaValue first_disagreement(const Path& p1, const Path& p2) {
    if (p1.size() != p2.size())
        throw LevelError("paths of unequal length have no disagreement time");
    for (std::size_t i = 0; i < p1.size(); ++i)
        if (p1[i] != p2[i])
            return SigmaValue::at(static_cast<int>(i));
    return SigmaValue::beyond();
}

std::string format_mode(Mode mode) {
    return mode == Mode::Direct ? "direct" : "recursive";
}

BuildResult build_direct_meet(const ProcessLaw& law1, const ProcessLaw& law2) {
    require_compatible(law1, law2);
    const int T = law1.horizon;
    const Alphabet& alphabet = law1.alphabet;
    const int n = alphabet.size();

    std::vector<PathMeasure> lev1, lev2, meets;
    for (int level = 0; level <= T + 1; ++level) {
        lev1.push_back(law_level(law1, level));
        lev2.push_back(law_level(law2, level));
        meets.push_back(meet(lev1.back(), lev2.back()));
    }
    check_internal(meets[0].total() == 1, "empty-prefix meet must have mass 1");

    LayeredCoupling coupling{law1, law2, Mode::Direct, {}};
    // Layers under construction, all at the current level; index = sigma time.
    std::vector<std::map<PathPair, Rat>> open;

    for (int t = 0; t <= T; ++t) {
        const PathMeasure& law1_next = lev1[static_cast<std::size_t>(t + 1)];
        const PathMeasure& law2_next = lev2[static_cast<std::size_t>(t + 1)];
        const PathMeasure& meet_here = meets[static_cast<std::size_t>(t)];
        const PathMeasure& meet_next = meets[static_cast<std::size_t>(t + 1)];

        // Per-prefix one-step residual capacities C, decoupling allocations B
        // and continuation leftovers R for one side.
        struct SideSlot {
            std::vector<Rat> remainder; // R(z, e), e over the alphabet
            Rat need;                   // law(z) - meet(z), total earlier-layer mass at z
        };
        std::map<Path, SideSlot> slot1, slot2;
        std::map<PathPair, Rat> fresh; // the sigma = t layer, at level t+1

        auto capacities = [&](const PathMeasure& law_next, const Path& z) {
            std::vector<Rat> c(static_cast<std::size_t>(n), Rat(0));
            Path child = z;
            child.push_back(0);
            for (int e = 0; e < n; ++e) {
                child.back() = e;
                c[static_cast<std::size_t>(e)] = law_next.mass(child) - meet_next.mass(child);
                check_internal(c[static_cast<std::size_t>(e)] >= 0,
                               "negative residual capacity");
            }
            return c;
        };
        auto side_slot = [&](int side, const Path& z) -> SideSlot& {
            auto& slots = side == 1 ? slot1 : slot2;
            auto it = slots.find(z);
            if (it != slots.end())
                return it->second;
            const PathMeasure& lev = side == 1 ? lev1[static_cast<std::size_t>(t)]
                                               : lev2[static_cast<std::size_t>(t)];
            const PathMeasure& nxt = side == 1 ? law1_next : law2_next;
            SideSlot slot{capacities(nxt, z), lev.mass(z) - meet_here.mass(z)};
            check_internal(slot.need >= 0, "law mass below agreement mass at a prefix");
            return slots.emplace(z, std::move(slot)).first->second;
        };

        // Decoupling deficits spawn the sigma = t layer and shave B off the
        // capacities, leaving R = C - B for the earlier layers.
        for (const auto& [z, pi_prev] : meet_here.atoms()) {
            Rat d = pi_prev;
            Path child = z;
            child.push_back(0);
            for (int e = 0; e < n; ++e) {
                child.back() = e;
                d -= meet_next.mass(child);
            }
            check_internal(d >= 0, "negative decoupling deficit");
            if (d == 0)
                continue;
            SideSlot& s1 = side_slot(1, z);
            SideSlot& s2 = side_slot(2, z);
            std::vector<Rat> b1(static_cast<std::size_t>(n)), b2(static_cast<std::size_t>(n));
            for (int side = 1; side <= 2; ++side) {
                SideSlot& s = side == 1 ? s1 : s2;
                std::vector<Rat>& b = side == 1 ? b1 : b2;
                Rat cap_total = 0;
                for (const Rat& c : s.remainder)
                    cap_total += c;
                check_internal(cap_total == s.need + d,
                               "capacity total does not telescope against the deficit");
                check_internal(cap_total > 0, "positive deficit with zero capacity");
                for (int e = 0; e < n; ++e) {
                    b[static_cast<std::size_t>(e)] =
                        d * s.remainder[static_cast<std::size_t>(e)] / cap_total;
                    s.remainder[static_cast<std::size_t>(e)] -= b[static_cast<std::size_t>(e)];
                }
            }
            for (int e1 = 0; e1 < n; ++e1) {
                if (b1[static_cast<std::size_t>(e1)] == 0)
                    continue;
                for (int e2 = 0; e2 < n; ++e2) {
                    if (b2[static_cast<std::size_t>(e2)] == 0)
                        continue;
                    check_internal(e1 != e2, "decoupling pair on the diagonal");
                    Path p1 = z, p2 = z;
                    p1.push_back(e1);
                    p2.push_back(e2);
                    fresh[{p1, p2}] +=
                        b1[static_cast<std::size_t>(e1)] * b2[static_cast<std::size_t>(e2)] / d;
                }
            }
        }

        // Earlier layers continue from level t to t+1 along the leftover
        // capacities, product form across the two sides.
        for (auto& layer : open) {
            std::map<PathPair, Rat> extended;
            for (const auto& [pair, mass] : layer) {
                const SideSlot& s1 = side_slot(1, pair.first);
                const SideSlot& s2 = side_slot(2, pair.second);
                check_internal(s1.need > 0 && s2.need > 0,
                               "open layer mass at a prefix with no continuation need");
                for (int e1 = 0; e1 < n; ++e1) {
                    const Rat& r1 = s1.remainder[static_cast<std::size_t>(e1)];
                    if (r1 == 0)
                        continue;
                    for (int e2 = 0; e2 < n; ++e2) {
                        const Rat& r2 = s2.remainder[static_cast<std::size_t>(e2)];
                        if (r2 == 0)
                            continue;
                        Path p1 = pair.first, p2 = pair.second;
                        p1.push_back(e1);
                        p2.push_back(e2);
                        extended[{p1, p2}] += mass * r1 / s1.need * r2 / s2.need;
                    }
                }
            }
            layer = std::move(extended);
        }
        open.push_back(std::move(fresh));
    }

    for (int t = 0; t <= T; ++t)
        add_layer(coupling, SigmaValue::at(t), std::move(open[static_cast<std::size_t>(t)]));
    std::map<PathPair, Rat> diagonal;
    for (const auto& [path, mass] : meets[static_cast<std::size_t>(T + 1)].atoms())
        diagonal[{path, path}] = mass;
    add_layer(coupling, SigmaValue::beyond(), std::move(diagonal));

    // Ladder, reconstructed from the layers: mu_bar[i][t] is the side-i
    // measure of {sigma >= t} on full paths.
    ConstructionLadder ladder{Mode::Direct, {}, {}, {}};
    for (int t = 0; t <= T; ++t)
        ladder.pi.push_back(meets[static_cast<std::size_t>(t + 1)]);
    ladder.mu_bar.assign(2, {});
    ladder.mu_layer.assign(2, {});
    for (int side = 1; side <= 2; ++side) {
        std::vector<PathMeasure> bars(static_cast<std::size_t>(T + 2),
                                      PathMeasure(alphabet, T + 1));
        std::vector<PathMeasure> parts(static_cast<std::size_t>(T + 1),
                                       PathMeasure(alphabet, T + 1));
        for (const auto& [path, mass] : meets[static_cast<std::size_t>(T + 1)].atoms())
            bars[static_cast<std::size_t>(T + 1)].add(path, mass);
        for (int t = T; t >= 0; --t) {
            PathMeasure bar = bars[static_cast<std::size_t>(t + 1)];
            auto it = coupling.layers.find(SigmaValue::at(t));
            if (it != coupling.layers.end()) {
                for (const auto& [pair, mass] : it->second) {
                    parts[static_cast<std::size_t>(t)].add(side == 1 ? pair.first : pair.second,
                                                           mass);
                    bar.add(side == 1 ? pair.first : pair.second, mass);
                }
            }
            bars[static_cast<std::size_t>(t)] = std::move(bar);
        }
        ladder.mu_bar[static_cast<std::size_t>(side - 1)] = std::move(bars);
        ladder.mu_layer[static_cast<std::size_t>(side - 1)] = std::move(parts);
    }
    check_internal(ladder.mu_bar[0][0] == law1.paths && ladder.mu_bar[1][0] == law2.paths,
                   "constructed coupling does not reproduce the law marginals");
    return BuildResult{std::move(coupling), std::move(ladder)};
}

BuildResult build_recursive(const ProcessLaw& law1, const ProcessLaw& law2) {
    require_compatible(law1, law2);
    const int T = law1.horizon;

    ConstructionLadder ladder{Mode::Recursive, {}, {}, {}};
    ladder.mu_bar.assign(2, {});
    ladder.mu_layer.assign(2, {});
    ladder.mu_bar[0].push_back(law1.paths);
    ladder.mu_bar[1].push_back(law2.paths);
    for (int t = 0; t <= T; ++t) {
        PathMeasure pi = meet(restrict(ladder.mu_bar[0].back(), t),
                              restrict(ladder.mu_bar[1].back(), t));
        ladder.mu_bar[0].push_back(extend_proportional(pi, law1, T + 1));
        ladder.mu_bar[1].push_back(extend_proportional(pi, law2, T + 1));
        ladder.pi.push_back(std::move(pi));
        for (int side = 0; side < 2; ++side) {
            const auto& bars = ladder.mu_bar[static_cast<std::size_t>(side)];
            ladder.mu_layer[static_cast<std::size_t>(side)].push_back(
                subtract(bars[static_cast<std::size_t>(t)],
                         bars[static_cast<std::size_t>(t + 1)]));
        }
    }

    LayeredCoupling coupling{law1, law2, Mode::Recursive, {}};
    for (int t = 0; t <= T; ++t) {
        const PathMeasure& part1 = ladder.mu_layer[0][static_cast<std::size_t>(t)];
        const PathMeasure& part2 = ladder.mu_layer[1][static_cast<std::size_t>(t)];
        PathMeasure common = restrict(part1, t - 1);
        check_internal(common == restrict(part2, t - 1),
                       "decoupled parts disagree on their shared prefix measure");
        // Group both parts by the shared level-t history and pair them as a
        // conditional product within each group.
        std::map<Path, std::vector<std::pair<Path, Rat>>> group1, group2;
        for (const auto& [path, mass] : part1.atoms())
            group1[Path(path.begin(), path.begin() + t)].emplace_back(path, mass);
        for (const auto& [path, mass] : part2.atoms())
            group2[Path(path.begin(), path.begin() + t)].emplace_back(path, mass);
        std::map<PathPair, Rat> layer;
        for (const auto& [z, mass_z] : common.atoms()) {
            auto g1 = group1.find(z);
            auto g2 = group2.find(z);
            check_internal(g1 != group1.end() && g2 != group2.end(),
                           "shared prefix measure without matching decoupled atoms");
            for (const auto& [p1, m1] : g1->second)
                for (const auto& [p2, m2] : g2->second) {
                    check_internal(p1[static_cast<std::size_t>(t)] != p2[static_cast<std::size_t>(t)],
                                   "decoupling pair on the diagonal");
                    layer[{p1, p2}] += m1 * m2 / mass_z;
                }
        }
        add_layer(coupling, SigmaValue::at(t), std::move(layer));
    }
    const PathMeasure& tail1 = ladder.mu_bar[0][static_cast<std::size_t>(T + 1)];
    check_internal(tail1 == ladder.mu_bar[1][static_cast<std::size_t>(T + 1)],
                   "tail measures of the two sides differ");
    std::map<PathPair, Rat> diagonal;
    for (const auto& [path, mass] : tail1.atoms())
        diagonal[{path, path}] = mass;
    add_layer(coupling, SigmaValue::beyond(), std::move(diagonal));
    return BuildResult{std::move(coupling), std::move(ladder)};
}

BuildResult build(const ProcessLaw& law1, const ProcessLaw& law2, Mode mode) {
    return mode == Mode::Direct ? build_direct_meet(law1, law2)
                                : build_recursive(law1, law2);
}

std::map<SigmaValue, Rat> sigma_distribution(const LayeredCoupling& c) {
    std::map<SigmaValue, Rat> dist;
    for (const auto& [s, layer] : c.layers)
        dist.emplace(s, layer_total(layer));
    return dist;
}

std::vector<Rat> agreement_profile(const LayeredCoupling& c) {
    const int T = c.law1.horizon;
    std::vector<Rat> profile(static_cast<std::size_t>(T + 1), Rat(0));
    for (const auto& [s, layer] : c.layers) {
        Rat mass = layer_total(layer);
        for (int t = 0; t <= T; ++t)
            if (s.is_beyond() || s.time() > t)
                profile[static_cast<std::size_t>(t)] += mass;
    }
    return profile;
}

std::vector<Rat> agreement_ceiling(const ProcessLaw& law1, const ProcessLaw& law2) {
    require_compatible(law1, law2);
    std::vector<Rat> ceiling;
    for (int t = 0; t <= law1.horizon; ++t)
        ceiling.push_back(Rat(1) - tv_distance(law1, law2, t));
    return ceiling;
}

CouplingReport verify_coupling(const LayeredCoupling& c) {
    CouplingReport report;
    auto flag = [&](const std::string& v) {
        report.passed = false;
        report.violations.push_back(v);
    };
    const int T = c.law1.horizon;
    const std::size_t full = static_cast<std::size_t>(T + 1);
    PathMeasure side1(c.law1.alphabet, T + 1), side2(c.law2.alphabet, T + 1);
    for (const auto& [s, layer] : c.layers) {
        if (!s.is_beyond() && s.time() > T)
            flag("layer sigma=" + format_sigma(s) + " lies beyond the horizon");
        for (const auto& [pair, mass] : layer) {
            std::string where = "sigma=" + format_sigma(s) + " atom ('" +
                                format_path(c.law1.alphabet, pair.first) + "', '" +
                                format_path(c.law1.alphabet, pair.second) + "')";
            if (pair.first.size() != full || pair.second.size() != full) {
                flag(where + ": paths are not full length");
                continue;
            }
            if (mass <= 0) {
                flag(where + ": non-positive mass " + format_rational(mass));
                continue;
            }
            SigmaValue actual = first_disagreement(pair.first, pair.second);
            if (actual != s)
                flag(where + ": first disagreement is " + format_sigma(actual));
            side1.add(pair.first, mass);
            side2.add(pair.second, mass);
        }
    }
    for (int side = 1; side <= 2; ++side) {
        const PathMeasure& got = side == 1 ? side1 : side2;
        const PathMeasure& want = side == 1 ? c.law1.paths : c.law2.paths;
        if (got == want)
            continue;
        for (const auto& [path, mass] : want.atoms())
            if (got.mass(path) != mass)
                flag("side " + std::to_string(side) + " marginal at '" +
                     format_path(c.law1.alphabet, path) + "': coupling " +
                     format_rational(got.mass(path)) + " vs law " + format_rational(mass));
        for (const auto& [path, mass] : got.atoms())
            if (want.mass(path) == 0)
                flag("side " + std::to_string(side) + " marginal at '" +
                     format_path(c.law1.alphabet, path) + "': coupling " +
                     format_rational(mass) + " vs law 0/1");
    }
    return report;
}

MaximalityReport verify_maximality(const LayeredCoupling& c) {
    MaximalityReport report;
    std::vector<Rat> achieved = agreement_profile(c);
    std::vector<Rat> ceiling = agreement_ceiling(c.law1, c.law2);
    for (int t = 0; t <= c.law1.horizon; ++t) {
        MaximalityEntry entry;
        entry.t = t;
        entry.achieved = achieved[static_cast<std::size_t>(t)];
        entry.ceiling = ceiling[static_cast<std::size_t>(t)];
        entry.shortfall = entry.ceiling - entry.achieved;
        entry.equal = entry.shortfall == 0;
        if (!entry.equal)
            report.passed = false;
        report.per_t.push_back(std::move(entry));
    }
    return report;
}

ConditionalReport conditional_marginal_check(const LayeredCoupling& c, int t) {
    ConditionalReport report;
    const int T = c.law1.horizon;
    if (t < 0 || t > T)
        throw LevelError("time index out of horizon range");
    for (int side = 1; side <= 2; ++side) {
        const ProcessLaw& law = side == 1 ? c.law1 : c.law2;
        PathMeasure law_prefixes = law_level(law, t + 1);
        // Side-i full-path mass of {Z^i prefix = z, sigma >= t}, per z.
        std::map<Path, std::map<Path, Rat>> events;
        for (const auto& [s, layer] : c.layers) {
            if (!s.is_beyond() && s.time() < t)
                continue;
            for (const auto& [pair, mass] : layer) {
                const Path& p = side == 1 ? pair.first : pair.second;
                Path z(p.begin(), p.begin() + t + 1);
                events[z][p] += mass;
            }
        }
        for (const auto& [z, event] : events) {
            Rat event_total = 0;
            for (const auto& [p, mass] : event)
                event_total += mass;
            if (event_total == 0)
                continue;
            Rat law_z = law_prefixes.mass(z);
            auto fail = [&](const std::string& detail) {
                report.passed = false;
                report.violations.push_back(
                    ConditionalViolation{side, t, z, detail});
            };
            if (law_z == 0) {
                fail("event mass " + format_rational(event_total) +
                     " on a prefix the law gives mass 0");
                continue;
            }
            // Conditional equality by cross multiplication:
            // event(p) / event_total == law(p) / law(z) for every p over z.
            bool ok = true;
            for (const auto& [p, mass] : event) {
                if (mass * law_z != law.paths.mass(p) * event_total) {
                    fail("conditional at path '" + format_path(law.alphabet, p) + "': " +
                         format_rational(mass / event_total) + " vs law " +
                         format_rational(law.paths.mass(p) / law_z));
                    ok = false;
                    break;
                }
            }
            if (!ok)
                continue;
            for (const auto& [p, law_p] : law.paths.atoms()) {
                if (std::equal(z.begin(), z.end(), p.begin()) &&
                    event.find(p) == event.end() && law_p > 0) {
                    fail("law-positive continuation '" + format_path(law.alphabet, p) +
                         "' carries no event mass");
                    break;
                }
            }
        }
    }
    return report;
}

ConditionalReport conditional_marginal_check_all(const LayeredCoupling& c) {
    ConditionalReport merged;
    for (int t = 0; t <= c.law1.horizon; ++t) {
        ConditionalReport r = conditional_marginal_check(c, t);
        if (!r.passed)
            merged.passed = false;
        merged.violations.insert(merged.violations.end(), r.violations.begin(),
                                 r.violations.end());
    }
    return merged;
}

std::map<PathPair, Rat> independent_product_policy(const ProcessLaw& law1,
                                                   const ProcessLaw& law2,
                                                   const Path& w1, const Path& w2) {
    const int level = static_cast<int>(w1.size());
    PathMeasure lev1 = law_level(law1, level), lev2 = law_level(law2, level);
    Rat base1 = lev1.mass(w1), base2 = lev2.mass(w2);
    if (base1 == 0 || base2 == 0)
        throw ConditioningError("recoupling at a zero-mass prefix");
    std::map<PathPair, Rat> block;
    for (const auto& [p1, m1] : law1.paths.atoms()) {
        if (!std::equal(w1.begin(), w1.end(), p1.begin()))
            continue;
        for (const auto& [p2, m2] : law2.paths.atoms()) {
            if (!std::equal(w2.begin(), w2.end(), p2.begin()))
                continue;
            block[{p1, p2}] = m1 / base1 * m2 / base2;
        }
    }
    return block;
}

std::map<PathPair, Rat> greedy_meet_policy(const ProcessLaw& law1,
                                           const ProcessLaw& law2,
                                           const Path& w1, const Path& w2) {
    const int level = static_cast<int>(w1.size());
    PathMeasure lev1 = law_level(law1, level), lev2 = law_level(law2, level);
    Rat base1 = lev1.mass(w1), base2 = lev2.mass(w2);
    if (base1 == 0 || base2 == 0)
        throw ConditioningError("recoupling at a zero-mass prefix");
    // Conditional continuation distributions over suffixes.
    std::map<Path, Rat> p, q;
    for (const auto& [p1, m1] : law1.paths.atoms())
        if (std::equal(w1.begin(), w1.end(), p1.begin()))
            p[Path(p1.begin() + level, p1.end())] = m1 / base1;
    for (const auto& [p2, m2] : law2.paths.atoms())
        if (std::equal(w2.begin(), w2.end(), p2.begin()))
            q[Path(p2.begin() + level, p2.end())] = m2 / base2;

    auto full = [&](const Path& w, const Path& suffix) {
        Path path = w;
        path.insert(path.end(), suffix.begin(), suffix.end());
        return path;
    };
    std::map<PathPair, Rat> block;
    Rat leftover_total = 1;
    for (auto& [suffix, mass] : p) {
        auto it = q.find(suffix);
        if (it == q.end())
            continue;
        Rat paired = mass < it->second ? mass : it->second;
        if (paired == 0)
            continue;
        block[{full(w1, suffix), full(w2, suffix)}] += paired;
        mass -= paired;
        it->second -= paired;
        leftover_total -= paired;
    }
    if (leftover_total > 0) {
        for (const auto& [s1, m1] : p) {
            if (m1 == 0)
                continue;
            for (const auto& [s2, m2] : q) {
                if (m2 == 0)
                    continue;
                block[{full(w1, s1), full(w2, s2)}] += m1 * m2 / leftover_total;
            }
        }
    }
    return block;
}

LayeredCoupling regraft(const LayeredCoupling& c, const RecouplePolicy& policy) {
    LayeredCoupling out{c.law1, c.law2, c.mode, {}};
    const int T = c.law1.horizon;
    for (const auto& [s, layer] : c.layers) {
        if (s.is_beyond()) {
            out.layers.emplace(s, layer);
            continue;
        }
        const int level = s.time() + 1;
        std::map<PathPair, Rat> prefixes;
        for (const auto& [pair, mass] : layer)
            prefixes[{Path(pair.first.begin(), pair.first.begin() + level),
                      Path(pair.second.begin(), pair.second.begin() + level)}] += mass;
        std::map<PathPair, Rat> grafted;
        for (const auto& [pair, mass] : prefixes) {
            std::map<PathPair, Rat> block = policy(c.law1, c.law2, pair.first, pair.second);
            // The block must couple the two conditional continuations exactly.
            PathMeasure got1(c.law1.alphabet, T + 1), got2(c.law2.alphabet, T + 1);
            Rat block_total = 0;
            for (const auto& [bp, bm] : block) {
                if (bm < 0 ||
                    bp.first.size() != static_cast<std::size_t>(T + 1) ||
                    bp.second.size() != static_cast<std::size_t>(T + 1) ||
                    !std::equal(pair.first.begin(), pair.first.end(), bp.first.begin()) ||
                    !std::equal(pair.second.begin(), pair.second.end(), bp.second.begin()))
                    throw PolicyError("policy block atom does not extend the prefix pair ('" +
                                      format_path(c.law1.alphabet, pair.first) + "', '" +
                                      format_path(c.law1.alphabet, pair.second) + "')");
                got1.add(bp.first, bm);
                got2.add(bp.second, bm);
                block_total += bm;
            }
            if (block_total != 1)
                throw PolicyError("policy block mass " + format_rational(block_total) +
                                  " instead of 1/1 at prefix pair ('" +
                                  format_path(c.law1.alphabet, pair.first) + "', '" +
                                  format_path(c.law1.alphabet, pair.second) + "')");
            for (int side = 1; side <= 2; ++side) {
                const ProcessLaw& law = side == 1 ? c.law1 : c.law2;
                const Path& w = side == 1 ? pair.first : pair.second;
                const PathMeasure& got = side == 1 ? got1 : got2;
                Rat base = law_level(law, level).mass(w);
                for (const auto& [path, law_mass] : law.paths.atoms()) {
                    if (!std::equal(w.begin(), w.end(), path.begin()))
                        continue;
                    if (got.mass(path) * base != law_mass)
                        throw PolicyError("policy block side " + std::to_string(side) +
                                          " marginal mismatch at '" +
                                          format_path(law.alphabet, path) + "': got " +
                                          format_rational(got.mass(path)) + ", want " +
                                          format_rational(law_mass / base));
                }
                if (got.total() != 1)
                    throw PolicyError("policy block side " + std::to_string(side) +
                                      " carries mass outside the prefix class");
            }
            for (const auto& [bp, bm] : block)
                grafted[bp] += bm * mass;
        }
        add_layer(out, s, std::move(grafted));
    }
    return out;
}

} // namespace maxagree
