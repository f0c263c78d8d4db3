// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "reference.hpp"
#include "reprk/estimator.hpp"
#include "reprk/evaluators.hpp"
#include "reprk/fixtures.hpp"
#include "reprk/numerals.hpp"
#include "reprk/universal.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace reprk;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void fail(const std::string& why) {
        if (pass) note << why;
        pass = false;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const std::vector<fixtures::Fixture>& fx() {
    static const auto all = fixtures::all();
    return all;
}

std::shared_ptr<Registry> registry() {
    static const auto reg = fixtures::builtin_registry();
    return reg;
}

std::uint64_t count_of(const std::string& behavior) { return std::stoull(behavior.substr(behavior.rfind(' ') + 1)); }

// 1. |<e,p>| = |p| + 2|e| + 1 and decode(encode) = id for |e|, |p| <= 8.
void pairing_law(Outcome& o) {
    const auto t0 = Clock::now();
    std::vector<Word> words;
    for_each_word(8, [&](const Word& w) { words.push_back(w); });
    std::size_t checked = 0;
    for (const auto& e : words) {
        for (const auto& p : words) {
            const Word w = couple_encode(e, p);
            Pair back;
            if (w.size() != p.size() + 2 * e.size() + 1 || !try_couple_decode(w, back) || back.header != e ||
                back.payload != p) {
                o.fail("pair (" + e.str() + "," + p.str() + ")");
                return;
            }
            ++checked;
        }
    }
    const double s = seconds_since(t0);
    if (s >= 5) o.fail("took " + std::to_string(s) + " s");
    o.note << checked << " pairs in " << s << " s";
}

// 2. All nine <=ct wirings at L = 12, T = 10^4, n in [0, 30], one worker.
void ct_ledger(Outcome& o) {
    const auto t0 = Clock::now();
    EvalOptions opt;
    opt.registry = registry();
    const std::uint64_t T = 10000;
    std::map<Notion, EstimateTable> tables;
    for (auto n : kAllNotions) tables[n] = enumerate_estimate(n, 12, T, 0, 30, opt, 1);
    std::size_t checks = 0;
    for (const auto& w : wirings()) {
        CtWitness cw;
        try {
            cw = check_ct(w, tables.at(w.a), T, opt, &tables.at(w.b));
        } catch (const CtViolation& e) {
            o.fail(std::string("CtViolation: ") + e.what());
            return;
        }
        if (!cw.verified()) {
            o.fail(std::string(notion_name(w.a)) + "->" + std::string(notion_name(w.b)) + " failed");
            return;
        }
        for (const auto& k : cw.checks) {
            if (k.compiled.size() - k.witness.size() != cw.c || cw.c != 2 * cw.header.size() + 1) {
                o.fail("length gap differs from 2|e|+1");
                return;
            }
        }
        checks += cw.checks.size();
    }
    const double s = seconds_since(t0);
    if (s >= 600) o.fail("took " + std::to_string(s) + " s");
    o.note << "9 wirings, " << checks << " transformed witnesses, " << s << " s";
}

// 3. card(stream2card(p)) = emissions, emissions(card2stream(q)) = |domain(q)|.
void dovetail_equivalence(Outcome& o) {
    const Context ctx{registry(), 0};
    int streams = 0, functions = 0;
    for (const auto& f : fx()) {
        if (f.mode == "stream" && f.behavior != "emits infinity") {
            const auto want = count_of(f.behavior);
            const EvalResult r = eval_card_N(compile(Combinator::stream2card, f.word()), 5000, ctx);
            if (!r.value || *r.value != want) o.fail(f.name + " via STREAM2CARD");
            ++streams;
        } else if (f.mode == "func" && f.domain_bound) {
            const auto want = count_of(f.behavior);
            // The declared domain itself, by brute force over inputs below the bound.
            rm::PartialFunction pf(f.payload, rm::Env{}, 100000);
            std::uint64_t brute = 0;
            for (std::uint64_t x = 0; x < *f.domain_bound; ++x) brute += pf(Nat(x)).has_value() ? 1 : 0;
            const EvalResult r = eval_stream(compile(Combinator::card2stream, f.word()), 5000, ctx);
            if (brute != want || !r.value || *r.value != want || r.status != Status::exact) {
                o.fail(f.name + " via CARD2STREAM");
            }
            ++functions;
        }
    }
    if (streams < 20 || functions < 20) o.fail("too few fixtures");
    o.note << streams << " stream and " << functions << " function fixtures";
}

// 4. Overshoot: |D1| - |D2| = scripted unary output; ledger invariant each step.
void harmless_overshoot(Outcome& o) {
    int programs = 0;
    std::uint64_t steps = 0;
    for (const auto& f : fx()) {
        if (f.mode != "oracle" || f.script.size() > 3) continue;
        const Nat want = reftest::run_scripted(f).unary();
        OvershootCard em(f.word(), Context{registry(), 0}, 5000);
        bool ledger_ok = true;
        em.observer = [&](const Overshoot&) {
            ++steps;
            std::size_t live = 0;
            for (auto t : em.d1()) {
                const auto c = em.cancelled_at(t);
                if (!c) ++live;
                if (c && (*c < t || *c >= em.steps())) ledger_ok = false;
            }
            for (const auto& [t, c] : em.d2()) ledger_ok = ledger_ok && em.in_d1(t);
            if (live != em.live_points().size() || em.d1().size() - em.d2().size() != live) ledger_ok = false;
        };
        em.ensure(5000);
        if (!ledger_ok) o.fail(f.name + ": ledger invariant broken");
        if (!em.final() || Nat(em.d1().size() - em.d2().size()) != want) o.fail(f.name + ": difference");
        ++programs;
    }
    o.note << programs << " oracle fixtures, " << steps << " instrumented steps";
}

// 5. Ord fixtures, the ORACLESTREAM2ORD direction and the <= 4 vertex sweep.
void ord_pipeline(Outcome& o) {
    const auto t0 = Clock::now();
    const Context ctx{registry(), 0};
    int rel = 0, streams = 0;
    for (const auto& f : fx()) {
        if (f.mode == "relation") {
            EdgeSet edges;
            rm::PartialFunction pf(f.payload, rm::Env{}, 100000, rm::Mode::relation());
            for (std::uint64_t x = 0; x < *f.domain_bound; ++x) {
                for (std::uint64_t y = 0; y < *f.domain_bound; ++y) {
                    if (pf(std::vector<Nat>{x, y})) edges.emplace_back(x, y);
                }
            }
            const auto brute = brute_quotient_oracle(edges);
            const EvalResult r = eval_ord(f.word(), 5000, ctx);
            const bool same = brute ? (r.value && *r.value == *brute && r.status == Status::exact) : !r.value;
            if (!same) o.fail(f.name + ": eval_ord disagrees with closure");
            ++rel;
        } else if (f.mode == "oracle-stream") {
            const Nat want = reftest::run_scripted(f).emits;
            const EvalResult r = eval_ord(compile(Combinator::oraclestream2ord, f.word()), 5000, ctx);
            if (!r.value || Nat(*r.value) != want) o.fail(f.name + ": ORACLESTREAM2ORD");
            ++streams;
        }
    }
    std::size_t sets = 0, via_programs = 0;
    for (unsigned mask = 0; mask < (1u << 16); ++mask) {
        EdgeSet edges;
        std::set<std::pair<int, int>> es;
        for (int i = 0; i < 16; ++i) {
            if (mask & (1u << i)) {
                edges.emplace_back(i / 4, i % 4);
                es.emplace(i / 4, i % 4);
            }
        }
        const auto want = brute_quotient_oracle(edges);
        if (quotient_chain(edges) != want) {
            o.fail("SCC/closure mismatch on mask " + std::to_string(mask));
            break;
        }
        ++sets;
        const Word w = fixtures::relation_program(es);
        auto reg = std::make_shared<Registry>();
        reg->declare_domain_bound(w, 4);
        const EvalResult r = eval_ord(w, 2000, Context{reg, 0});
        const bool same = want ? (r.value && *r.value == *want) : !r.value;
        if (!same) o.fail("eval_ord on relation program, mask " + std::to_string(mask));
        ++via_programs;
    }
    const double s = seconds_since(t0);
    if (s >= 60) o.fail("took " + std::to_string(s) + " s");
    o.note << rel << " relation and " << streams << " oracle-stream fixtures, " << sets << " edge sets ("
           << via_programs << " as programs), " << s << " s";
}

// 6. ITER(n) for n <= 16 and the probe suite; const_zero rejected.
void church(Outcome& o) {
    Context ctx;
    const auto probes = default_probes();
    for (int n = 0; n <= 16; ++n) {
        const Word w = compile(Combinator::iter, Word(), n);
        const EvalResult r = eval_church_probe(w, probes, 10000, ctx);
        if (!r.value || *r.value != n || r.status != Status::exact) o.fail("ITER(" + std::to_string(n) + ")");
        if (eval_halt(compile(Combinator::church_extract, w), 10000, ctx).value != Int(n)) {
            o.fail("extractor on ITER(" + std::to_string(n) + ")");
        }
    }
    const EvalResult bad = eval_church_probe(fixtures::get(fx(), "const_zero").word(), probes, 10000, ctx);
    if (bad.value) o.fail("const_zero accepted");
    o.note << "17 iterators exact, " << probes.size() << " probes, const_zero rejected";
}

// 7. Numeral roundtrips, four squares, prime sums, Avizienis rewrites.
void numerals_check(Outcome& o) {
    using namespace reprk::numerals;
    for (int k : {2, 3, 10}) {
        const std::vector<PositionalSystem> systems{PositionalSystem::k_ary(k), PositionalSystem::k_adic(k),
                                                    PositionalSystem::avizienis(k)};
        for (const auto& sys : systems) {
            for (int n = 0; n <= 10000; ++n) {
                if (digits_to_value(sys, value_to_digits(sys, n)) != n) {
                    o.fail("roundtrip k=" + std::to_string(k) + " n=" + std::to_string(n));
                    return;
                }
            }
        }
    }
    for (int n = 0; n <= 10000; ++n) {
        if (digits_to_value(PositionalSystem::unary(), value_to_digits(PositionalSystem::unary(), n)) != n) {
            o.fail("unary roundtrip");
            return;
        }
    }
    PrimeTable primes(10000);
    for (std::int64_t n = 0; n <= 10000; ++n) {
        const auto q = four_squares(n);
        if (q.x * q.x + q.y * q.y + q.z * q.z + q.t * q.t != n) o.fail("four squares " + std::to_string(n));
        if (n < 2) continue;
        const auto p = prime_sum(n, primes);
        std::int64_t sum = 0;
        for (auto v : p) {
            sum += v;
            if (!primes.is_prime(v)) o.fail("non-prime summand for " + std::to_string(n));
        }
        if (sum != n || p.size() > 7) o.fail("prime sum " + std::to_string(n));
    }
    std::mt19937 rng(2024);
    int rewrites = 0;
    while (rewrites < 1000) {
        const int k = std::vector<int>{2, 3, 10}[rng() % 3];
        const auto sys = PositionalSystem::avizienis(k);
        // Build a string where a rewrite applies at a random position.
        DigitString ds(2 + rng() % 6);
        for (auto& d : ds) d = sys.min_digit() + static_cast<int>(rng() % (sys.max_digit() - sys.min_digit() + 1));
        const std::size_t pos = rng() % (ds.size() - 1);
        const int j = -k + 1 + static_cast<int>(rng() % (2 * k - 2));  // -k < j < k-1
        const int i = 1 + static_cast<int>(rng() % (k - 1));           // 0 < i < k
        ds[ds.size() - 2 - pos] = j;
        ds[ds.size() - 1 - pos] = i;
        const Int before = digits_to_value(sys, ds);
        const DigitString after = avizienis_rewrite(sys, ds, AvizienisRewrite{pos, j, i});
        if (digits_to_value(sys, after) != before) o.fail("rewrite changed a value");
        ++rewrites;
    }
    o.note << "n <= 10^4 across 10 systems, " << rewrites << " rewrites";
}

// 8. Byte-identical reruns and monotone approximation under budget doubling.
void determinism(Outcome& o) {
    EvalOptions opt;
    opt.registry = registry();
    for (auto n : kAllNotions) {
        const std::string a = to_csv(enumerate_estimate(n, 10, 2000, 0, 30, opt, 1));
        const std::string b = to_csv(enumerate_estimate(n, 10, 2000, 0, 30, opt, 1));
        const std::string c = to_csv(enumerate_estimate(n, 10, 2000, 0, 30, opt, 4));
        if (a != b || a != c) o.fail(std::string(notion_name(n)) + " table not reproducible");
    }
    const Context ctx{registry(), 0};
    std::size_t checks = 0;
    for (const auto& f : fx()) {
        std::optional<Int> prev_value;
        std::vector<Discovery> prev_log;
        for (std::uint64_t T = 64; T <= 4096; T *= 2) {
            std::optional<Int> value;
            if (f.mode == "stream") {
                value = eval_stream(f.word(), T, ctx).value;
            } else if (f.mode == "func" || f.mode == "relation") {
                const auto fn = f.mode == "func" ? make_function(f.word(), ctx, T) : make_relation(f.word(), ctx, T);
                const DomainCount dc = count_domain(fn, T);
                value = Int(dc.count);
                // Discoveries at T are a prefix of those at 2T.
                if (prev_log.size() > dc.log.size() ||
                    !std::equal(prev_log.begin(), prev_log.end(), dc.log.begin())) {
                    o.fail(f.name + ": discovery log not monotone");
                }
                prev_log = dc.log;
            } else if (f.mode == "oracle-stream") {
                auto src = OracleSource::registry_augmented(T, registry());
                Context c2{registry(), T};
                value = eval_oracle_stream(f.word(), T, c2, src).value;
            } else {
                break;
            }
            if (prev_value && value && *value < *prev_value) o.fail(f.name + ": count decreased");
            if (value) prev_value = value;
            ++checks;
        }
    }
    o.note << "8 notions reproducible across worker counts, " << checks << " budget-doubling checks";
}

// 9. The report disclaims strict separations.
void non_claims(Outcome& o) {
    EvalOptions opt;
    opt.registry = registry();
    std::map<Notion, EstimateTable> tables;
    for (auto n : kAllNotions) tables[n] = enumerate_estimate(n, 8, 1000, 0, 30, opt);
    std::vector<CtWitness> ws;
    for (const auto& w : wirings()) ws.push_back(check_ct(w, tables.at(w.a), 1000, opt, &tables.at(w.b)));
    const std::string report = hierarchy_report(tables, ws, 8, 1000);
    const std::string golden =
        "NOT CERTIFIED: strict separations (K >ct Kinf >ct Kprime >ct Kprime_inf, and the >ct steps between the "
        "Church, CardN, CardZ and Ord complexities) are asymptotic statements about uncomputable functions. "
        "A finite table cannot certify them; only the <=ct directions above are machine-checked.";
    if (report.find(golden) == std::string::npos) o.fail("disclaimer missing from report");
    if (report.find("Strict separations (>ct): not desk-verifiable.") == std::string::npos) {
        o.fail("separation rows not marked");
    }
    o.note << "disclaimer present";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"1 pairing law", pairing_law},
        {"2 <=ct ledger", ct_ledger},
        {"3 dovetail compilers", dovetail_equivalence},
        {"4 harmless overshoot", harmless_overshoot},
        {"5 ord pipeline", ord_pipeline},
        {"6 church numerals", church},
        {"7 numerals", numerals_check},
        {"8 determinism and monotonicity", determinism},
        {"9 explicit non-claims", non_claims},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            run(o);
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.note.str() << std::endl;
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
