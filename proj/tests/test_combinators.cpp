#include "reference.hpp"
#include "reprk/evaluators.hpp"
#include "reprk/fixtures.hpp"
#include "reprk/universal.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace reprk;

namespace {

const std::vector<fixtures::Fixture>& fx() {
    static const auto all = fixtures::all();
    return all;
}
Word word_of(const std::string& name) { return fixtures::get(fx(), name).word(); }

Context reg_ctx(std::uint64_t lookahead = 0) { return Context{fixtures::builtin_registry(), lookahead}; }

std::uint64_t stream_count(const Word& w, std::uint64_t budget, const Context& ctx) {
    auto m = make_machine(Space::stream, w, ctx, budget);
    std::uint64_t n = 0;
    for (std::uint64_t s = 0; s < budget; ++s) {
        const Tick t = m->step();
        if (t == Tick::emit) ++n;
        if (t == Tick::halt || t == Tick::stuck) break;
    }
    return n;
}

std::optional<Nat> halting_value(MachinePtr m, std::uint64_t budget) {
    for (std::uint64_t s = 0; s < budget; ++s) {
        const Tick t = m->step();
        if (t == Tick::halt) return *m->value();
        if (t == Tick::stuck) return std::nullopt;
    }
    return std::nullopt;
}

Word pair_word(const Word& p1, const Word& p2) { return Word("1") + couple_encode(p1, p2); }

std::uint64_t parse_count(const std::string& behavior) {
    return std::stoull(behavior.substr(behavior.rfind(' ') + 1));
}

}  // namespace

TEST(Universal, RawHeader) {
    const Word payload("0011");
    const Decoded d = universal_decode(Word("1") + payload);
    EXPECT_EQ(d.id, Combinator::raw);
    EXPECT_EQ(d.payload, payload);
}

TEST(Universal, FixedHeadersDecodeWithExactOverhead) {
    const Word p = word_of("emit3");
    for (const auto& h : kFixedHeaders) {
        const Word w = compile(h.id, p);
        const Decoded d = universal_decode(w);
        EXPECT_EQ(d.id, h.id);
        EXPECT_EQ(d.payload, p);
        EXPECT_EQ(w.size() - p.size(), 2 * h.tag.size() + 1);
        EXPECT_EQ(overhead(h.id), 2 * h.tag.size() + 1);
    }
}

TEST(Universal, HeadersAreDistinctAndDecodeBack) {
    std::vector<Word> headers;
    for (const auto& h : kFixedHeaders) headers.emplace_back(h.tag);
    for (int n = 0; n < 40; ++n) {
        headers.push_back(header_word(Combinator::iter, n));
        headers.push_back(header_word(Combinator::negiter, n));
    }
    std::vector<std::string> tags{std::string(kIterTag), std::string(kNegIterTag)};
    for (const auto& h : kFixedHeaders) tags.emplace_back(h.tag);
    for (std::size_t i = 0; i < tags.size(); ++i) {
        for (std::size_t j = 0; j < tags.size(); ++j) {
            if (i != j) {
                EXPECT_NE(tags[j].rfind(tags[i], 0), 0u) << tags[i] << " is a prefix of " << tags[j];
            }
        }
    }
    std::set<std::string> seen;
    for (const auto& h : headers) EXPECT_TRUE(seen.insert(h.str()).second) << h << " repeats";
    // The pairing delimits the header, so prefix overlaps between headers are harmless.
    const Word p("0110");
    for (const auto& h : headers) {
        const Word w = couple_encode(h, p);
        const Decoded d = universal_decode(w);
        EXPECT_EQ(d.payload, p) << h;
        EXPECT_EQ(header_word(d.id, d.n), h);
    }
}

TEST(Universal, IterHeaderRoundTrip) {
    for (int n = 0; n < 64; ++n) {
        const Decoded d = universal_decode(compile(Combinator::iter, Word(), n));
        EXPECT_EQ(d.id, Combinator::iter);
        EXPECT_EQ(d.n, n);
    }
    EXPECT_EQ(parse_combinator("ITER(3)").second, 3);
    EXPECT_EQ(parse_combinator("STREAM2CARD").first, Combinator::stream2card);
    EXPECT_THROW(parse_combinator("NOPE"), std::invalid_argument);
}

TEST(Universal, UnassignedHeaderIsNowhereDefined) {
    const Word w = couple_encode(Word("0111"), word_of("output5"));
    EXPECT_EQ(universal_decode(w).id, Combinator::unknown);
    Context ctx;
    EXPECT_FALSE(halting_value(make_machine(Space::halt, w, ctx, 100), 100));
    EXPECT_EQ(stream_count(w, 100, ctx), 0u);
    EXPECT_FALSE(eval_card_N(w, 100, ctx).value.value_or(1) != 0);
    // Words with no terminator decode to nothing as well.
    EXPECT_EQ(universal_decode(Word("0000")).id, Combinator::unknown);
}

TEST(Halt2Stream, EmitsTheOutput) {
    Context ctx;
    EXPECT_EQ(stream_count(compile(Combinator::halt2stream, word_of("output5")), 1000, ctx), 5u);
    EXPECT_EQ(stream_count(compile(Combinator::halt2stream, word_of("busy_loop")), 1000, ctx), 0u);
}

TEST(Halt2Stream, LengthOverheadConstant) {
    std::vector<Word> programs;
    for (const auto& f : fx()) programs.push_back(f.word());
    std::mt19937 rng(11);
    while (programs.size() < 100) {
        std::string s(1 + rng() % 20, '0');
        for (auto& c : s) c = rng() % 2 ? '1' : '0';
        programs.emplace_back(s);
    }
    for (const auto& p : programs) EXPECT_EQ(compile(Combinator::halt2stream, p).size() - p.size(), 9u);
}

TEST(Stream2Card, DomainIsTheEmissionSteps) {
    Context ctx;
    const Word q = compile(Combinator::stream2card, word_of("emit3"));
    auto f = make_function(q, ctx, 1000);
    const DomainCount c = count_domain(f, 1000);
    EXPECT_TRUE(c.complete);
    EXPECT_EQ(c.count, 3u);
    // Reference: the steps at which the program emits.
    rm::MachineState s;
    const rm::Code code = rm::decode(fixtures::get(fx(), "emit3").payload);
    std::set<std::uint64_t> steps;
    while (!s.halted) {
        if (rm::step(s, code, rm::Mode::stream(), rm::Env{}) == rm::StepEvent::emitted) steps.insert(s.steps - 1);
    }
    std::set<std::uint64_t> found;
    for (const auto& d : c.log) found.insert(d.task);
    EXPECT_EQ(found, steps);
}

TEST(Stream2Card, EndlessAndEmptyStreams) {
    Context ctx;
    EXPECT_FALSE(eval_card_N(compile(Combinator::stream2card, word_of("emit_forever")), 2000, ctx).acceptable());
    const EvalResult zero = eval_card_N(compile(Combinator::stream2card, word_of("emit0")), 100, ctx);
    EXPECT_EQ(zero.value, 0);
    EXPECT_EQ(zero.status, Status::exact);
}

TEST(Card2Stream, Dom3EmitsThree) {
    for (const Context& ctx : {Context{}, reg_ctx()}) {
        const EvalResult r = eval_stream(compile(Combinator::card2stream, word_of("dom3")), 1000, ctx);
        EXPECT_EQ(r.value, 3);
        EXPECT_TRUE(r.acceptable());
    }
    EXPECT_EQ(eval_stream(compile(Combinator::card2stream, word_of("everywhere_undefined")), 1000, Context{}).value, 0);
}

TEST(Card2Stream, CompositionPreservesCardinality) {
    const Context ctx = reg_ctx();
    for (const auto& f : fx()) {
        if (f.mode != "func" || !f.domain_bound || *f.domain_bound > 5) continue;
        const Word round_trip = compile(Combinator::stream2card, compile(Combinator::card2stream, f.word()));
        const EvalResult direct = eval_card_N(f.word(), 2000, ctx);
        const EvalResult via = eval_card_N(round_trip, 2000, ctx);
        ASSERT_TRUE(direct.acceptable()) << f.name;
        EXPECT_EQ(via.value, direct.value) << f.name;
    }
}

TEST(Overshoot, NoQueriesReducesToCounting) {
    auto em = std::make_shared<OvershootCard>(word_of("o_emit2"), reg_ctx(), 1000);
    em->ensure(1000);
    EXPECT_TRUE(em->final());
    EXPECT_EQ(em->d1().size(), 2u);
    EXPECT_TRUE(em->d2().empty());
}

TEST(Overshoot, LedgerInvariantAndScriptedEquivalence) {
    for (const auto& f : fx()) {
        if (f.mode != "oracle" || f.script.size() > 3) continue;
        const auto ref = reftest::run_scripted(f);
        ASSERT_EQ(ref.unary(), parse_count(f.behavior)) << f.name;

        OvershootCard em(f.word(), reg_ctx(), 5000);
        std::uint64_t checks = 0;
        em.observer = [&](const Overshoot&) {
            ++checks;
            const auto& d1 = em.d1();
            const auto& d2 = em.d2();
            ASSERT_TRUE(std::is_sorted(d1.begin(), d1.end()));
            ASSERT_LE(d2.size(), d1.size());
            std::vector<std::uint64_t> live;
            for (auto t : d1) {
                auto c = em.cancelled_at(t);
                if (c) {
                    ASSERT_GE(*c, t);
                    ASSERT_LT(*c, em.steps());
                } else {
                    live.push_back(t);
                }
            }
            for (const auto& [t, c] : d2) ASSERT_TRUE(em.in_d1(t));
            ASSERT_EQ(live, em.live_points());
            ASSERT_EQ(d1.size() - d2.size(), em.live_points().size());
        };
        em.ensure(5000);
        EXPECT_TRUE(em.final()) << f.name;
        EXPECT_GT(checks, 0u);
        EXPECT_EQ(Nat(em.d1().size() - em.d2().size()), ref.unary()) << f.name;
        if (!f.script.empty() && f.script.front() == Answer::yes) {
            EXPECT_FALSE(em.corrections().empty()) << f.name;
        }
    }
}

TEST(Overshoot, CardZOfCompiledOracleProgram) {
    for (const auto& f : fx()) {
        if (f.mode != "oracle") continue;
        const EvalResult r = eval_card_Z(compile(Combinator::oracle2cardz, f.word()), 5000, reg_ctx());
        EXPECT_EQ(r.value, Int(reftest::run_scripted(f).unary())) << f.name;
        EXPECT_EQ(r.status, Status::exact) << f.name;
    }
}

TEST(CardZ2Oracle, Examples) {
    const Context ctx = reg_ctx(1000);
    auto value = [&](const Word& p1, const Word& p2) {
        auto src = OracleSource::registry_augmented(1000, ctx.registry);
        auto m = make_machine(Space::oracle_halt, compile(Combinator::cardz2oracle, pair_word(p1, p2)), ctx, 1000, &src);
        return halting_value(std::move(m), 5000);
    };
    EXPECT_EQ(value(word_of("dom3"), word_of("dom1")), Nat(2));
    EXPECT_EQ(value(word_of("dom3"), word_of("dom3")), Nat(0));
    EXPECT_EQ(value(word_of("dom3"), word_of("dom0")), Nat(3));
    EXPECT_FALSE(value(word_of("dom1"), word_of("dom3")).has_value());
}

TEST(CardZ, PairExamples) {
    const Context ctx = reg_ctx();
    EXPECT_EQ(eval_card_Z(pair_word(word_of("dom3"), word_of("dom1")), 1000, ctx).value, 2);
    EXPECT_EQ(eval_card_Z(pair_word(word_of("dom5"), word_of("dom5")), 1000, ctx).value, 0);
    EXPECT_EQ(eval_card_Z(pair_word(word_of("dom1"), word_of("dom3")), 1000, ctx).value, -2);
}

TEST(OracleStream2Ord, NoQueries) {
    const Context ctx = reg_ctx();
    for (const std::string name : {"os_emit1", "os_emit2", "os_emit4"}) {
        OvershootOrd em(word_of(name), ctx, 2000);
        em.ensure(2000);
        ASSERT_TRUE(em.final());
        EdgeSet edges;
        for (const auto& [e, step] : em.edges()) edges.push_back(e);
        EXPECT_EQ(brute_quotient_oracle(edges), Nat(reftest::run_scripted(fixtures::get(fx(), name)).emits)) << name;
    }
}

TEST(OracleStream2Ord, CorrectedQueriesCollapse) {
    const Context ctx = reg_ctx();
    for (const auto& f : fx()) {
        if (f.mode != "oracle-stream") continue;
        OvershootOrd em(f.word(), ctx, 5000);
        em.ensure(5000);
        ASSERT_TRUE(em.final()) << f.name;
        EdgeSet edges;
        for (const auto& [e, step] : em.edges()) edges.push_back(e);
        const auto ref = reftest::run_scripted(f);
        EXPECT_EQ(brute_quotient_oracle(edges), Nat(ref.emits)) << f.name;
        EXPECT_EQ(quotient_chain(edges), brute_quotient_oracle(edges)) << f.name;
        EXPECT_EQ(eval_ord(compile(Combinator::oraclestream2ord, f.word()), 5000, ctx).value, Int(ref.emits))
            << f.name;
    }
}

TEST(Ord2OracleStream, RelationFixtures) {
    const Context ctx = reg_ctx(1000);
    for (const auto& f : fx()) {
        if (f.mode != "relation") continue;
        auto src = OracleSource::registry_augmented(1000, ctx.registry);
        const EvalResult r = eval_oracle_stream(compile(Combinator::ord2oraclestream, f.word()), 5000, ctx, src);
        // Reference: the explicit edge set of the fixture through the brute-force closure.
        const auto expected = eval_ord(f.word(), 5000, ctx);
        if (f.behavior == "ord undefined") {
            EXPECT_FALSE(expected.value) << f.name;
            continue;
        }
        ASSERT_TRUE(expected.acceptable()) << f.name;
        EXPECT_EQ(r.value, expected.value) << f.name;
        EXPECT_EQ(*r.value, Int(parse_count(f.behavior))) << f.name;
    }
}

TEST(Iter, SuccessorAtZero) {
    Context ctx;
    auto m = make_machine(Space::effop, compile(Combinator::iter, Word(), 3), ctx, 100, nullptr, successor, 0);
    EXPECT_EQ(halting_value(std::move(m), 100), Nat(3));
}

TEST(Iter, ZeroIsIdentityOnSamples) {
    Context ctx;
    std::mt19937 rng(5);
    for (int i = 0; i < 20; ++i) {
        const Nat x = rng() % 1000;
        const std::uint64_t a = rng() % 7;
        rm::ArgumentFn f = [a](const Nat& y) -> std::optional<Nat> { return y * a + 1; };
        auto m = make_machine(Space::effop, compile(Combinator::iter, Word(), 0), ctx, 100, nullptr, f, x);
        EXPECT_EQ(halting_value(std::move(m), 100), x);
    }
}

TEST(NegIter, InvertsSuccessor) {
    Context ctx;
    auto m = make_machine(Space::effop, compile(Combinator::negiter, Word(), 1), ctx, 1000, nullptr, successor, 5);
    EXPECT_EQ(halting_value(std::move(m), 1000), Nat(4));
}

TEST(Halt2Church, OutputBecomesIterationCount) {
    Context ctx;
    const Word w = compile(Combinator::halt2church, word_of("output5"));
    auto m = make_machine(Space::effop, w, ctx, 1000, nullptr, successor, 10);
    EXPECT_EQ(halting_value(std::move(m), 1000), Nat(15));
    const EvalResult r = eval_church_probe(w, default_probes(), 1000, ctx);
    EXPECT_EQ(r.value, 5);
    EXPECT_EQ(r.status, Status::exact);
}

TEST(ChurchExtract, AppliesToSuccessorAtZero) {
    Context ctx;
    for (int n = 0; n <= 16; ++n) {
        const Word w = compile(Combinator::church_extract, compile(Combinator::iter, Word(), n));
        EXPECT_EQ(eval_halt(w, 1000, ctx).value, n);
    }
    EXPECT_EQ(eval_halt(compile(Combinator::church_extract, word_of("apply_twice")), 1000, ctx).value, 2);
}
