#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxagree/tau.hpp"

#include "testutil.hpp"

using namespace maxagree;
using testutil::R;
using testutil::P;

namespace {

Rat joint_mass(const ExtendedCoupling& ec, const std::string& p1, TauValue tau) {
    Path path = P(ec.base.law1.alphabet, p1);
    Rat out = 0;
    for (const auto& [key, mass] : ec.atoms)
        if (std::get<0>(key) == path && std::get<2>(key) == tau)
            out += mass;
    return out;
}

} // namespace

TEST_CASE("the hazard formula scans one-step likelihood ratios") {
    Instance skew = testutil::skew_pair();
    CHECK(kappa(skew.law1, skew.law2, 0) == R("1/2"));
    CHECK(kappa(skew.law1, skew.law2, 1) == R("1/2"));
    CHECK(kappa(skew.law2, skew.law1, 0) == R("1/3"));

    Instance same = testutil::identical_pair();
    CHECK(kappa(same.law1, same.law2, 0) == 0);
    CHECK(kappa(same.law1, same.law2, 1) == 0);

    Instance d = testutil::disjoint_pair();
    CHECK(kappa(d.law1, d.law2, 0) == 1);
    CHECK(kappa(d.law1, d.law2, 1) == 1);

    SUBCASE("a deterministic mismatch forces hazard one at every time") {
        Alphabet e = testutil::ab();
        ProcessLaw one = law_iid(e, 1, {Rat(1), Rat(0)});
        ProcessLaw two = law_iid(e, 1, {Rat(0), Rat(1)});
        CHECK(kappa(one, two, 0) == 1);
        CHECK(kappa(one, two, 1) == 1);
    }
    SUBCASE("out-of-range times are rejected") {
        CHECK_THROWS_AS(kappa(skew.law1, skew.law2, -1), LevelError);
        CHECK_THROWS_AS(kappa(skew.law1, skew.law2, 2), LevelError);
    }
}

TEST_CASE("conditional hazards of the direct construction stay within the formula") {
    Instance inst = testutil::skew_pair();
    Alphabet e = inst.law1.alphabet;
    LayeredCoupling c = build_direct_meet(inst.law1, inst.law2).coupling;
    HazardProfile profile = kappa_profile(c);
    REQUIRE(profile.per_t.size() == 2);

    const HazardEntry& h0 = profile.per_t[0];
    CHECK(h0.formula == R("1/2"));
    CHECK(h0.conditional.at(P(e, "a")) == R("1/2"));
    CHECK(h0.conditional.at(P(e, "b")) == 0);
    CHECK(h0.max_conditional == R("1/2"));
    CHECK(h0.effective == R("1/2"));
    CHECK(h0.within_formula);

    const HazardEntry& h1 = profile.per_t[1];
    CHECK(h1.formula == R("1/2"));
    CHECK(h1.conditional.at(P(e, "b,a")) == R("1/4"));
    CHECK(h1.conditional.at(P(e, "a,a")) == 0);
    CHECK(h1.conditional.at(P(e, "a,b")) == 0);
    CHECK(h1.conditional.at(P(e, "b,b")) == 0);
    CHECK(h1.max_conditional == R("1/4"));
    CHECK(h1.effective == R("1/2"));
    CHECK(h1.within_formula);
}

TEST_CASE("conditional hazards of the recursive construction equal the formula") {
    Instance inst = testutil::skew_pair();
    Alphabet e = inst.law1.alphabet;
    LayeredCoupling c = build_recursive(inst.law1, inst.law2).coupling;
    HazardProfile profile = kappa_profile(c);

    const HazardEntry& h1 = profile.per_t[1];
    CHECK(h1.conditional.at(P(e, "a,a")) == R("1/2"));
    CHECK(h1.conditional.at(P(e, "b,a")) == R("1/2"));
    CHECK(h1.conditional.at(P(e, "a,b")) == 0);
    CHECK(h1.conditional.at(P(e, "b,b")) == 0);
    CHECK(h1.max_conditional == h1.formula);
    CHECK(h1.effective == h1.formula);
    CHECK(h1.within_formula);

    SUBCASE("agreement mass remaining at a prefix is the law mass thinned by the hazard") {
        ConstructionLadder ladder = build_recursive(inst.law1, inst.law2).ladder;
        for (int t = 0; t <= 1; ++t) {
            const auto ut = static_cast<std::size_t>(t);
            PathMeasure lev = restrict(ladder.mu_bar[0][ut], t);
            for (const auto& [z, mass] : ladder.pi[ut].atoms())
                CHECK(mass ==
                      (Rat(1) - profile.per_t[ut].conditional.at(z)) * lev.mass(z));
        }
    }
}

TEST_CASE("tau attaches to the direct construction without exact factorization") {
    Instance inst = testutil::skew_pair();
    ExtendedCoupling ec = extend_with_tau(build_direct_meet(inst.law1, inst.law2).coupling);

    CHECK(joint_mass(ec, "a,a", TauValue::at(0)) == R("6/32"));
    CHECK(joint_mass(ec, "a,a", TauValue::at(1)) == R("1/32"));
    CHECK(joint_mass(ec, "a,a", TauValue::beyond()) == R("1/32"));
    CHECK(joint_mass(ec, "a,b", TauValue::at(0)) == R("2/32"));
    CHECK(joint_mass(ec, "a,b", TauValue::at(1)) == R("3/32"));
    CHECK(joint_mass(ec, "a,b", TauValue::beyond()) == R("3/32"));
    CHECK(joint_mass(ec, "b,a", TauValue::at(0)) == R("4/32"));
    CHECK(joint_mass(ec, "b,a", TauValue::at(1)) == R("2/32"));
    CHECK(joint_mass(ec, "b,a", TauValue::beyond()) == R("2/32"));
    CHECK(joint_mass(ec, "b,b", TauValue::at(0)) == R("4/32"));
    CHECK(joint_mass(ec, "b,b", TauValue::at(1)) == R("2/32"));
    CHECK(joint_mass(ec, "b,b", TauValue::beyond()) == R("2/32"));

    TauReport report = verify_tau(ec);
    CHECK_FALSE(report.independent);
    REQUIRE(report.independence_counterexample.has_value());
    const auto& [path, tau, joint, product] = *report.independence_counterexample;
    CHECK(path == P(inst.law1.alphabet, "a,a"));
    CHECK(tau == TauValue::at(0));
    CHECK(joint == R("3/16"));
    CHECK(product == R("1/8"));

    CHECK(report.tau_le_sigma);
    CHECK(report.hazard_identity);
    CHECK(report.survival_product);
    CHECK(report.beyond_consistent);
    CHECK(report.effective_equals_formula);
    CHECK_FALSE(report.passed());

    CHECK(report.tau_distribution.at(TauValue::at(0)) == R("1/2"));
    CHECK(report.tau_distribution.at(TauValue::at(1)) == R("1/4"));
    CHECK(report.tau_distribution.at(TauValue::beyond()) == R("1/4"));
    CHECK(report.survival == std::vector<Rat>{R("1/2"), R("1/4")});
}

TEST_CASE("tau attached to the recursive construction is independent of the path") {
    Instance inst = testutil::skew_pair();
    ExtendedCoupling ec = extend_with_tau(build_recursive(inst.law1, inst.law2).coupling);

    for (const char* p : {"a,a", "a,b", "b,a", "b,b"}) {
        CHECK(joint_mass(ec, p, TauValue::at(0)) == R("4/32"));
        CHECK(joint_mass(ec, p, TauValue::at(1)) == R("2/32"));
        CHECK(joint_mass(ec, p, TauValue::beyond()) == R("2/32"));
    }

    TauReport report = verify_tau(ec);
    CHECK(report.independent);
    CHECK_FALSE(report.independence_counterexample.has_value());
    CHECK(report.passed());
    CHECK(report.effective_equals_formula);
    CHECK(report.tau_distribution.at(TauValue::at(0)) == R("1/2"));
    CHECK(report.tau_distribution.at(TauValue::at(1)) == R("1/4"));
    CHECK(report.tau_distribution.at(TauValue::beyond()) == R("1/4"));
    CHECK(report.survival == std::vector<Rat>{R("1/2"), R("1/4")});

    SUBCASE("projecting tau out returns the base coupling") {
        std::map<PathPair, Rat> projected, base;
        for (const auto& [key, mass] : ec.atoms)
            projected[{std::get<0>(key), std::get<1>(key)}] += mass;
        for (const auto& [s, layer] : ec.base.layers) {
            (void)s;
            for (const auto& [pair, mass] : layer)
                base[pair] += mass;
        }
        CHECK(projected == base);
    }
    SUBCASE("tau never exceeds the disagreement time") {
        for (const auto& [key, mass] : ec.atoms) {
            (void)mass;
            CHECK(std::get<2>(key) <= first_disagreement(std::get<0>(key),
                                                         std::get<1>(key)));
        }
    }
    SUBCASE("swapping the two laws keeps the factorization") {
        ExtendedCoupling swapped =
            extend_with_tau(build_recursive(inst.law2, inst.law1).coupling);
        TauReport sr = verify_tau(swapped);
        CHECK(sr.independent);
        CHECK(sr.passed());
        CHECK(sr.tau_distribution.at(TauValue::at(0)) == R("1/3"));
    }
}

TEST_CASE("identical laws never decouple and tau stays beyond the horizon") {
    Instance inst = testutil::identical_pair();
    for (Mode mode : {Mode::Direct, Mode::Recursive}) {
        ExtendedCoupling ec = extend_with_tau(build(inst.law1, inst.law2, mode).coupling);
        TauReport report = verify_tau(ec);
        CHECK(report.passed());
        CHECK(report.tau_distribution.size() == 1);
        CHECK(report.tau_distribution.at(TauValue::beyond()) == 1);
        CHECK(report.survival == std::vector<Rat>{Rat(1), Rat(1)});
    }
}

TEST_CASE("disjoint supports force tau to zero") {
    Instance inst = testutil::disjoint_pair();
    ExtendedCoupling ec = extend_with_tau(build_direct_meet(inst.law1, inst.law2).coupling);
    TauReport report = verify_tau(ec);
    CHECK(report.passed());
    CHECK(report.tau_distribution.size() == 1);
    CHECK(report.tau_distribution.at(TauValue::at(0)) == 1);
    CHECK(report.survival == std::vector<Rat>{Rat(0), Rat(0)});
    CHECK(report.beyond_consistent);
}

TEST_CASE("a coupling with conditional hazards above the formula still extends") {
    Instance inst = testutil::skew_pair();
    LayeredCoupling prod = testutil::product_coupling(inst.law1, inst.law2);
    HazardProfile profile = kappa_profile(prod);
    CHECK(profile.per_t[0].max_conditional == R("3/4"));
    CHECK(profile.per_t[0].formula == R("1/2"));
    CHECK(profile.per_t[0].effective == R("3/4"));
    CHECK_FALSE(profile.per_t[0].within_formula);

    ExtendedCoupling ec = extend_with_tau(prod);
    TauReport report = verify_tau(ec);
    CHECK(report.tau_le_sigma);
    CHECK(report.hazard_identity);
    CHECK(report.survival_product);
    CHECK(report.beyond_consistent);
    CHECK_FALSE(report.effective_equals_formula);
}

TEST_CASE("tau verification notices tampered atoms") {
    Instance inst = testutil::skew_pair();
    ExtendedCoupling ec = extend_with_tau(build_recursive(inst.law1, inst.law2).coupling);
    Alphabet e = inst.law1.alphabet;

    std::tuple<Path, Path, TauValue> key{P(e, "a,a"), P(e, "b,a"), TauValue::at(0)};
    REQUIRE(ec.atoms.count(key) == 1);
    Rat mass = ec.atoms.at(key);
    ec.atoms.erase(key);
    ec.atoms[{P(e, "a,a"), P(e, "b,a"), TauValue::at(1)}] += mass;

    TauReport report = verify_tau(ec);
    CHECK_FALSE(report.tau_le_sigma);
    CHECK_FALSE(report.passed());
}

TEST_CASE("one-step bounds dominate the hazard through the minimal conditionals") {
    Instance skew = testutil::skew_pair();
    for (int t = 0; t <= 1; ++t) {
        CountableBounds b = countable_bounds(skew.law1, skew.law2, t);
        CHECK(b.delta1 == R("1/2"));
        CHECK(b.delta2 == R("1/4"));
        CHECK(b.bound_a == R("3/4"));
        CHECK(b.bound_b == R("1/2"));
        CHECK(b.kappa_value == R("1/2"));
        CHECK(b.kappa_le_a);
        CHECK(b.kappa_le_b);
    }

    SUBCASE("identical laws have zero hazard and zero difference bound") {
        Instance same = testutil::identical_pair();
        CountableBounds b = countable_bounds(same.law1, same.law2, 0);
        CHECK(b.bound_b == 0);
        CHECK(b.kappa_value == 0);
        CHECK(b.kappa_le_a);
        CHECK(b.kappa_le_b);
    }
    SUBCASE("disjoint supports saturate both bounds") {
        Instance d = testutil::disjoint_pair();
        CountableBounds b = countable_bounds(d.law1, d.law2, 0);
        CHECK(b.delta2 == 0);
        CHECK(b.bound_a == 1);
        CHECK(b.bound_b == 1);
        CHECK(b.kappa_value == 1);
        CHECK(b.kappa_le_a);
        CHECK(b.kappa_le_b);
    }
    SUBCASE("the difference bound can undershoot the hazard on three symbols") {
        // kappa compares ratios at the worst symbol; the difference bound
        // spreads the compensating mass over the other symbols. With three
        // symbols the spread halves the bound below the hazard.
        Alphabet e = testutil::abc();
        ProcessLaw one = law_iid(e, 0, {R("2/5"), R("3/10"), R("3/10")});
        ProcessLaw two = law_iid(e, 0, {R("1/5"), R("2/5"), R("2/5")});
        CountableBounds b = countable_bounds(one, two, 0);
        CHECK(b.kappa_value == R("1/2"));
        CHECK(b.bound_b == R("1/3"));
        CHECK_FALSE(b.kappa_le_b);
        CHECK(b.kappa_le_a);
    }
    SUBCASE("a second-law-null history drives the hazard past the difference bound") {
        // The hazard jumps to 1 on a history the second law never reaches,
        // while the difference bound only sees the law2-positive histories.
        Alphabet e = testutil::ab();
        ProcessLaw one =
            law_from_table(e, 1, {{P(e, "a,a"), R("1/2")}, {P(e, "b,a"), R("1/2")}});
        ProcessLaw two =
            law_from_table(e, 1, {{P(e, "b,a"), R("1/2")}, {P(e, "b,b"), R("1/2")}});
        CountableBounds b = countable_bounds(one, two, 1);
        CHECK(b.kappa_value == 1);
        CHECK(b.bound_b == R("1/2"));
        CHECK_FALSE(b.kappa_le_b);
        CHECK(b.kappa_le_a);
    }
    SUBCASE("on two symbols the difference bound dominates over shared histories") {
        testutil::InstanceGen gen(23);
        Alphabet e = testutil::ab();
        int covered = 0;
        for (int i = 0; i < 60; ++i) {
            ProcessLaw one = gen.random_law(e, 2);
            ProcessLaw two = gen.random_law(e, 2);
            for (int t = 0; t <= 2; ++t) {
                CountableBounds b = countable_bounds(one, two, t);
                CHECK(b.kappa_le_a);
                PathMeasure h1 = restrict(one.paths, t - 1);
                PathMeasure h2 = restrict(two.paths, t - 1);
                bool shared = true;
                for (const auto& [z, mass] : h1.atoms()) {
                    (void)mass;
                    if (h2.mass(z) == 0)
                        shared = false;
                }
                if (shared) {
                    CHECK(b.kappa_le_b);
                    ++covered;
                }
            }
        }
        CHECK(covered > 60);
    }
}

TEST_CASE("alternative bound readings cover shifted and uniform indexing") {
    Instance skew = testutil::skew_pair();
    CountableBoundsAlternatives alt =
        countable_bounds_alternatives(skew.law1, skew.law2);

    REQUIRE(alt.off_by_one.size() == 2);
    CHECK_FALSE(alt.off_by_one[0].has_value());
    REQUIRE(alt.off_by_one[1].has_value());
    CHECK(alt.off_by_one[1]->delta1 == R("1/2"));
    CHECK(alt.off_by_one[1]->bound_a == R("3/4"));
    CHECK(alt.off_by_one[1]->bound_b == R("1/2"));

    CHECK(alt.uniform.delta1 == R("1/2"));
    CHECK(alt.uniform.delta2 == R("1/4"));
    CHECK(alt.uniform.bound_a == R("3/4"));
    CHECK(alt.uniform.bound_b == R("1/2"));
    CHECK(alt.uniform.kappa_value == R("1/2"));
    CHECK(alt.uniform.kappa_le_a);
    CHECK(alt.uniform.kappa_le_b);
}
