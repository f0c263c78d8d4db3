#include "reprk/estimator.hpp"
#include "reprk/fixtures.hpp"

#include <gtest/gtest.h>

using namespace reprk;

namespace {

EvalOptions options() {
    EvalOptions opt;
    opt.registry = fixtures::builtin_registry();
    return opt;
}

const std::map<Notion, EstimateTable>& tables8() {
    static const auto t = [] {
        std::map<Notion, EstimateTable> out;
        for (auto n : kAllNotions) out[n] = enumerate_estimate(n, 8, 2000, 0, 30, options());
        return out;
    }();
    return t;
}

}  // namespace

TEST(Notion, NamesRoundTrip) {
    for (auto n : kAllNotions) EXPECT_EQ(parse_notion(notion_name(n)), n);
    EXPECT_THROW(parse_notion("Kzz"), std::invalid_argument);
}

TEST(Estimate, ShortestZeroProgramByDirectSweep) {
    // Below 9 bits every program is RAW, so a direct sweep over payloads run
    // on the machine is an independent answer.
    std::optional<std::size_t> best;
    for_each_word(8, [&](const Word& w) {
        if (best || w.empty() || !w[0]) return;
        try {
            const auto out = rm::run(w.substr(1), rm::Mode::halt(), {}, rm::Env{}, 2000);
            if (out.kind == rm::RunOutcome::Kind::halted && *out.value == 0) best = w.size();
        } catch (const ModeViolation&) {
        }
    });
    ASSERT_TRUE(best);
    EXPECT_EQ(tables8().at(Notion::K).ub(0), best);
}

TEST(Estimate, MonotoneInLength) {
    const auto opt = options();
    for (auto notion : {Notion::K, Notion::Kinf, Notion::Church}) {
        EstimateTable prev = enumerate_estimate(notion, 5, 1000, 0, 30, opt);
        for (std::size_t L = 6; L <= 9; ++L) {
            EstimateTable cur = enumerate_estimate(notion, L, 1000, 0, 30, opt);
            for (const auto& [n, row] : prev.rows) {
                ASSERT_TRUE(cur.ub(n)) << notion_name(notion) << " n=" << n;
                EXPECT_LE(*cur.ub(n), row.ub_length);
            }
            prev = std::move(cur);
        }
    }
}

TEST(Estimate, WorkersDoNotChangeTheTable) {
    const auto opt = options();
    for (auto notion : {Notion::K, Notion::Kprime_inf, Notion::Church}) {
        const auto one = enumerate_estimate(notion, 9, 1000, 0, 30, opt, 1);
        const auto three = enumerate_estimate(notion, 9, 1000, 0, 30, opt, 3);
        EXPECT_EQ(to_csv(one), to_csv(three));
    }
}

TEST(Estimate, WitnessesReplay) {
    const auto opt = options();
    for (const auto& [notion, table] : tables8()) {
        for (const auto& [n, row] : table.rows) {
            const EvalResult r = evaluate(notion, row.witness, row.budget, opt);
            EXPECT_EQ(r.value, n) << notion_name(notion);
            EXPECT_EQ(r.label(), row.status);
            EXPECT_EQ(row.witness.size(), row.ub_length);
        }
    }
}

TEST(Estimate, CsvRoundTrip) {
    std::string csv = csv_header();
    for (const auto& [notion, table] : tables8()) csv += to_csv(table);
    const auto rows = parse_csv(csv);
    std::size_t total = 0;
    for (const auto& [notion, table] : tables8()) total += table.rows.size();
    ASSERT_EQ(rows.size(), total);
    for (const auto& row : rows) {
        const auto& orig = tables8().at(row.notion).rows.at(row.n);
        EXPECT_EQ(row.witness, orig.witness);
        EXPECT_EQ(row.status, orig.status);
    }
    EXPECT_THROW(parse_csv("K,1,2\n"), std::invalid_argument);
}

TEST(CheckCt, AllWiringsAtSmallScale) {
    const auto opt = options();
    for (const auto& w : wirings()) {
        const CtWitness cw = check_ct(w, tables8().at(w.a), 2000, opt, &tables8().at(w.b));
        EXPECT_TRUE(cw.verified()) << notion_name(w.a) << "->" << notion_name(w.b);
        EXPECT_EQ(cw.c, 9u);
        for (const auto& k : cw.checks) EXPECT_EQ(k.compiled.size(), k.witness.size() + cw.c);
        EXPECT_LE(cw.max_gap, static_cast<long long>(cw.c));
    }
}

TEST(CheckCt, RawIdentityCostsOneBit) {
    // A witness "1"q is already <eps, q>: wrapping a bare payload costs one bit.
    for (const auto& [n, row] : tables8().at(Notion::K).rows) {
        const Decoded d = universal_decode(row.witness);
        ASSERT_EQ(d.id, Combinator::raw);
        EXPECT_EQ(compile(Combinator::raw, d.payload), row.witness);
        EXPECT_EQ(overhead(Combinator::raw), 1u);
    }
}

TEST(CheckCt, CorruptedTableIsCaught) {
    EstimateTable bad{Notion::K, {}};
    const Word w = fixtures::get("output0").word();
    bad.rows.emplace(Int(5), EstimateRow{Notion::K, Int(5), w.size(), w, 100, "exact"});
    const CtWitness cw = check_ct(wirings().back(), bad, 100, options());
    EXPECT_FALSE(cw.verified());
    EXPECT_EQ(cw.checks.front().got, 0);
}

TEST(Report, ContainsLedgerAndDisclaimer) {
    const auto opt = options();
    std::vector<CtWitness> ws;
    for (const auto& w : wirings()) ws.push_back(check_ct(w, tables8().at(w.a), 2000, opt, &tables8().at(w.b)));
    const std::string report = hierarchy_report(tables8(), ws, 8, 2000);
    EXPECT_NE(report.find(kStrictnessDisclaimer), std::string::npos);
    EXPECT_NE(report.find("not desk-verifiable"), std::string::npos);
    EXPECT_NE(report.find("Kinf=ctCardN"), std::string::npos);
    EXPECT_NE(report.find("K_CardN <= K_Kinf + 9"), std::string::npos);
    EXPECT_NE(report.find("K_Kinf <= K_CardN + 9"), std::string::npos);
    const std::string row = ledger_row(ws.front());
    EXPECT_EQ(row.substr(0, row.find(',', row.find(',') + 1)), "K,Church");
}

TEST(Report, FlaggedRowsAreExcludedFromTotals) {
    std::map<Notion, EstimateTable> tables;
    EstimateTable t{Notion::Church, {}};
    const Word it2 = compile(Combinator::iter, Word(), 2);
    const Word twice = fixtures::get("apply_twice").word();
    t.rows.emplace(Int(2), EstimateRow{Notion::Church, Int(2), twice.size(), twice, 1000, "probed"});
    t.rows.emplace(Int(1), EstimateRow{Notion::Church, Int(1), it2.size(), compile(Combinator::iter, Word(), 1), 1000,
                                       "exact"});
    tables[Notion::Church] = t;
    const CtWitness cw = check_ct(wirings()[1], t, 1000, options());
    const std::string report = hierarchy_report(tables, {cw}, 8, 1000);
    EXPECT_NE(report.find("1/1 verified (+1/1 flagged)"), std::string::npos) << report;
    EXPECT_NE(report.find(std::to_string(twice.size()) + "*"), std::string::npos);
}

TEST(Config, ParsesAndRejects) {
    const auto cfg = parse_config("# demo\nnotions = K, Church\nmax_len=6\nbudget=500\nn_max=9\noracle=budgeted\nworkers=2\n");
    EXPECT_EQ(cfg.notions, (std::vector<Notion>{Notion::K, Notion::Church}));
    EXPECT_EQ(cfg.max_len, 6u);
    EXPECT_EQ(cfg.budget, 500u);
    EXPECT_EQ(cfg.n_max, 9);
    EXPECT_EQ(cfg.oracle, OracleMode::budgeted);
    EXPECT_EQ(cfg.workers, 2u);
    EXPECT_THROW(parse_config("bogus=1"), std::invalid_argument);
    EXPECT_THROW(parse_config("budget=abc"), std::invalid_argument);
    EXPECT_THROW(parse_config("budget=0"), std::invalid_argument);
    EXPECT_THROW(parse_config("max_len"), std::invalid_argument);
    EXPECT_THROW(parse_config("oracle=psychic"), std::invalid_argument);
}
