#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxagree/laws.hpp"

#include "testutil.hpp"

using namespace maxagree;
using testutil::R;
using testutil::P;

TEST_CASE("law_from_table builds a validated path law") {
    Alphabet e = testutil::ab();
    ProcessLaw law = law_from_table(
        e, 1, {{P(e, "a,a"), R("1/3")}, {P(e, "b,b"), R("2/3")}});
    CHECK(law.horizon == 1);
    CHECK(law.paths.level() == 2);
    CHECK(law.paths.total() == 1);
    CHECK(law.paths.mass(P(e, "a,a")) == R("1/3"));

    SUBCASE("duplicate entries accumulate") {
        ProcessLaw dup = law_from_table(
            e, 0, {{P(e, "a"), R("1/2")}, {P(e, "a"), R("1/4")}, {P(e, "b"), R("1/4")}});
        CHECK(dup.paths.mass(P(e, "a")) == R("3/4"));
    }
    SUBCASE("a single unit atom gives a deterministic law") {
        ProcessLaw dirac = law_from_table(e, 1, {{P(e, "a,b"), Rat(1)}});
        CHECK(dirac.paths.atoms().size() == 1);
    }
    SUBCASE("total mass must be exactly one") {
        CHECK_THROWS_AS(law_from_table(e, 1, {{P(e, "a,a"), R("3/4")}}),
                        ValidationError);
    }
    SUBCASE("wrong path lengths and negative masses are rejected") {
        CHECK_THROWS_AS(law_from_table(e, 1, {{P(e, "a"), Rat(1)}}), LevelError);
        CHECK_THROWS_AS(law_from_table(e, 0,
                                       {{P(e, "a"), R("3/2")}, {P(e, "b"), R("-1/2")}}),
                        ValidationError);
    }
}

TEST_CASE("law_iid is the product of one step distribution") {
    Alphabet e = testutil::ab();
    ProcessLaw law = law_iid(e, 1, {R("1/4"), R("3/4")});
    CHECK(law.paths.mass(P(e, "a,a")) == R("1/16"));
    CHECK(law.paths.mass(P(e, "a,b")) == R("3/16"));
    CHECK(law.paths.mass(P(e, "b,a")) == R("3/16"));
    CHECK(law.paths.mass(P(e, "b,b")) == R("9/16"));
    CHECK(law.paths.total() == 1);

    SUBCASE("uniform step gives uniform paths") {
        ProcessLaw u = law_iid(e, 1, {R("1/2"), R("1/2")});
        for (const auto& [p, m] : u.paths.atoms()) {
            (void)p;
            CHECK(m == R("1/4"));
        }
        CHECK(u.paths.atoms().size() == 4);
    }
    SUBCASE("a unit step mass gives a constant path") {
        ProcessLaw dirac = law_iid(e, 2, {Rat(0), Rat(1)});
        CHECK(dirac.paths.atoms().size() == 1);
        CHECK(dirac.paths.mass(P(e, "b,b,b")) == 1);
    }
    SUBCASE("the step must be a distribution over the alphabet") {
        CHECK_THROWS_AS(law_iid(e, 1, {R("1/2"), R("1/4")}), ValidationError);
        CHECK_THROWS_AS(law_iid(e, 1, {R("1/2")}), ValidationError);
        CHECK_THROWS_AS(law_iid(e, 1, {R("3/2"), R("-1/2")}), ValidationError);
    }
}

TEST_CASE("law_markov multiplies the kernel along the path") {
    Alphabet s({"1", "2"});
    ProcessLaw chain = law_markov(
        {s, {Rat(1), Rat(0)}, {{R("1/2"), R("1/2")}, {Rat(0), Rat(1)}}, 1});
    CHECK(chain.paths.atoms().size() == 2);
    CHECK(chain.paths.mass(P(s, "1,1")) == R("1/2"));
    CHECK(chain.paths.mass(P(s, "1,2")) == R("1/2"));

    SUBCASE("identity kernel freezes the initial state") {
        ProcessLaw frozen = law_markov(
            {s, {R("1/3"), R("2/3")}, {{Rat(1), Rat(0)}, {Rat(0), Rat(1)}}, 2});
        CHECK(frozen.paths.atoms().size() == 2);
        CHECK(frozen.paths.mass(P(s, "1,1,1")) == R("1/3"));
        CHECK(frozen.paths.mass(P(s, "2,2,2")) == R("2/3"));
    }
    SUBCASE("constant kernel rows reproduce the iid law") {
        std::vector<Rat> step{R("1/4"), R("3/4")};
        ProcessLaw chain2 = law_markov({s, step, {step, step}, 2});
        CHECK(chain2.paths == law_iid(s, 2, step).paths);
    }
    SUBCASE("initial vector and kernel rows must be distributions") {
        CHECK_THROWS_AS(
            law_markov({s, {R("1/2"), R("1/4")}, {{Rat(1), Rat(0)}, {Rat(0), Rat(1)}}, 1}),
            ValidationError);
        CHECK_THROWS_AS(
            law_markov({s, {Rat(1), Rat(0)}, {{Rat(1), Rat(1)}, {Rat(0), Rat(1)}}, 1}),
            ValidationError);
        CHECK_THROWS_AS(law_markov({s, {Rat(1), Rat(0)}, {{Rat(1), Rat(0)}}, 1}),
                        ValidationError);
    }
}

TEST_CASE("pushforward sums mass over preimage classes") {
    Alphabet s({"1", "2", "3"});
    Alphabet e = testutil::ab();
    ProcessLaw chain = law_markov({s,
                                   {R("1/2"), R("1/4"), R("1/4")},
                                   {{R("1/2"), R("1/4"), R("1/4")},
                                    {R("1/4"), R("1/4"), R("1/2")},
                                    {R("1/2"), Rat(0), R("1/2")}},
                                   1});
    CoarseGrainMap phi{s, e, {0, 0, 1}}; // 1,2 -> a; 3 -> b
    ProcessLaw image = pushforward(chain, phi);
    CHECK(image.alphabet == e);
    CHECK(image.horizon == 1);
    CHECK(image.paths.total() == 1);

    SUBCASE("every image atom is the full preimage sum") {
        for (const Path& q : testutil::all_paths(e, 2)) {
            Rat expect = 0;
            for (const Path& p : testutil::all_paths(s, 2)) {
                Path mapped{phi.image[static_cast<std::size_t>(p[0])],
                            phi.image[static_cast<std::size_t>(p[1])]};
                if (mapped == q)
                    expect += chain.paths.mass(p);
            }
            CHECK(image.paths.mass(q) == expect);
        }
    }
    SUBCASE("pushforward commutes with restriction") {
        PathMeasure restricted = restrict(image.paths, 0);
        PathMeasure source = restrict(chain.paths, 0);
        PathMeasure by_hand(e, 1);
        for (const auto& [p, m] : source.atoms())
            by_hand.add(Path{phi.image[static_cast<std::size_t>(p[0])]}, m);
        CHECK(restricted == by_hand);
    }
    SUBCASE("injective relabeling keeps atom counts") {
        Alphabet e3({"x", "y", "z"});
        CoarseGrainMap relabel{s, e3, {2, 0, 1}};
        ProcessLaw moved = pushforward(chain, relabel);
        CHECK(moved.paths.atoms().size() == chain.paths.atoms().size());
        CHECK(moved.paths.mass(P(e3, "z,z")) == chain.paths.mass(P(s, "1,1")));
    }
    SUBCASE("constant map collapses to a deterministic law") {
        Alphabet one({"o"});
        CoarseGrainMap collapse{s, one, {0, 0, 0}};
        ProcessLaw point = pushforward(chain, collapse);
        CHECK(point.paths.atoms().size() == 1);
        CHECK(point.paths.mass(P(one, "o,o")) == 1);
    }
}

TEST_CASE("instances require matching alphabets and horizons") {
    Instance inst = testutil::skew_pair();
    CHECK_NOTHROW(require_compatible(inst.law1, inst.law2));

    Alphabet e = testutil::ab();
    ProcessLaw longer = law_iid(e, 2, {R("1/2"), R("1/2")});
    CHECK_THROWS_AS(require_compatible(inst.law1, longer), ValidationError);

    Alphabet other({"a", "b", "c"});
    ProcessLaw wider = law_iid(other, 1, {R("1/2"), R("1/2"), Rat(0)});
    CHECK_THROWS_AS(require_compatible(inst.law1, wider), ValidationError);
}
