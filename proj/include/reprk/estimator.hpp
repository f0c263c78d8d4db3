#pragma once

// Exhaustive enumeration of programs into upper-bound tables per complexity
// notion, and the harness that checks K_B(n) <= K_A(n) + c(e) by compiling
// each A-witness p into <e,p> and evaluating it under B.

#include "reprk/dovetail.hpp"
#include "reprk/evaluators.hpp"
#include "reprk/universal.hpp"
#include "reprk/word.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace reprk {

enum class Notion : std::uint8_t { K, Kinf, Kprime, Kprime_inf, CardN, CardZ, Ord, Church };

inline constexpr std::array<Notion, 8> kAllNotions{Notion::K,      Notion::Kinf,  Notion::Kprime, Notion::Kprime_inf,
                                                   Notion::CardN,  Notion::CardZ, Notion::Ord,    Notion::Church};

inline std::string_view notion_name(Notion n) {
    switch (n) {
        case Notion::K: return "K";
        case Notion::Kinf: return "Kinf";
        case Notion::Kprime: return "Kprime";
        case Notion::Kprime_inf: return "Kprime_inf";
        case Notion::CardN: return "CardN";
        case Notion::CardZ: return "CardZ";
        case Notion::Ord: return "Ord";
        case Notion::Church: return "Church";
    }
    return "?";
}

inline Notion parse_notion(std::string_view s) {
    for (auto n : kAllNotions) {
        if (notion_name(n) == s) return n;
    }
    throw std::invalid_argument("unknown notion '" + std::string(s) + "'");
}

enum class OracleMode : std::uint8_t { registry, budgeted };

struct EvalOptions {
    std::shared_ptr<const Registry> registry;
    OracleMode oracle = OracleMode::registry;
    std::uint64_t seed = 0;
};

/// Value of program w under a notion at budget T. Oracle notions consult a
/// fresh source whose search budget is T.
inline EvalResult evaluate(Notion notion, const Word& w, std::uint64_t budget, const EvalOptions& opt) {
    Context ctx{opt.registry, 0};
    auto source = [&] {
        return opt.oracle == OracleMode::registry ? OracleSource::registry_augmented(budget, opt.registry)
                                                  : OracleSource::budgeted_truth(budget);
    };
    switch (notion) {
        case Notion::K: return eval_halt(w, budget, ctx);
        case Notion::Kinf: return eval_stream(w, budget, ctx);
        case Notion::Kprime: {
            ctx.lookahead = budget;
            auto src = source();
            return eval_oracle_halt(w, budget, ctx, src);
        }
        case Notion::Kprime_inf: {
            ctx.lookahead = budget;
            auto src = source();
            return eval_oracle_stream(w, budget, ctx, src);
        }
        case Notion::CardN: return eval_card_N(w, budget, ctx);
        case Notion::CardZ: return eval_card_Z(w, budget, ctx);
        case Notion::Ord: return eval_ord(w, budget, ctx);
        case Notion::Church: return eval_church_probe(w, default_probes(opt.seed), budget, ctx);
    }
    return {};
}

struct EstimateRow {
    Notion notion;
    Int n;
    std::size_t ub_length;
    Word witness;
    std::uint64_t budget;
    std::string status;

    bool sound() const { return status == "exact" || status == "stable"; }
};

/// Rows keyed by n; each row holds the shortest (then length-lex least) witness.
struct EstimateTable {
    Notion notion = Notion::K;
    std::map<Int, EstimateRow> rows;

    std::optional<std::size_t> ub(const Int& n) const {
        auto it = rows.find(n);
        if (it == rows.end()) return std::nullopt;
        return it->second.ub_length;
    }

    /// Order-independent merge: per n keep the smaller witness.
    void merge(const EstimateTable& other) {
        for (const auto& [n, row] : other.rows) offer(row);
    }
    void offer(const EstimateRow& row) {
        auto it = rows.find(row.n);
        if (it == rows.end() || row.witness < it->second.witness) rows.insert_or_assign(row.n, row);
    }
};

/// Scans every word of length <= L. Workers take words by their first three
/// bits; results merge to the same table for any worker count.
inline EstimateTable enumerate_estimate(Notion notion, std::size_t max_len, std::uint64_t budget, const Int& n_min,
                                        const Int& n_max, const EvalOptions& opt, unsigned workers = 1) {
    if (max_len > 20) throw std::invalid_argument("max_len above 20 is not practical");
    workers = std::max(1u, workers);
    auto bucket = [](const Word& w) -> std::size_t {
        std::size_t b = 0;
        for (std::size_t i = 0; i < std::min<std::size_t>(3, w.size()); ++i) b = 2 * b + (w[i] ? 1 : 0);
        return b + (std::size_t{1} << std::min<std::size_t>(3, w.size()));
    };
    std::vector<EstimateTable> partial(workers, EstimateTable{notion, {}});
    auto work = [&](unsigned id) {
        for_each_word(max_len, [&](const Word& w) {
            if (bucket(w) % workers != id) return;
            const EvalResult r = evaluate(notion, w, budget, opt);
            if (!r.acceptable() || *r.value < n_min || *r.value > n_max) return;
            partial[id].offer(EstimateRow{notion, *r.value, w.size(), w, budget, r.label()});
        });
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (unsigned id = 0; id < workers; ++id) threads.emplace_back(work, id);
        for (auto& t : threads) t.join();
    }
    EstimateTable out{notion, {}};
    for (const auto& p : partial) out.merge(p);
    return out;
}

inline std::string csv_header() { return "notion,n,ub_length,witness_bits,budget,status\n"; }

inline std::string to_csv(const EstimateTable& t) {
    std::ostringstream os;
    for (const auto& [n, row] : t.rows) {
        os << notion_name(row.notion) << ',' << n << ',' << row.ub_length << ',' << row.witness << ',' << row.budget
           << ',' << row.status << '\n';
    }
    return os.str();
}

/// Parses rows written by to_csv (header lines are skipped).
inline std::vector<EstimateRow> parse_csv(const std::string& text) {
    std::vector<EstimateRow> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line.rfind("notion,", 0) == 0) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
        if (line.back() == ',') cols.emplace_back();
        if (cols.size() != 6) throw std::invalid_argument("bad CSV row: " + line);
        rows.push_back(EstimateRow{parse_notion(cols[0]), Int(cols[1]), std::stoull(cols[2]), Word(cols[3]),
                                   std::stoull(cols[4]), cols[5]});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// The <=ct harness

class CtViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Wiring {
    Notion a;
    Notion b;
    Combinator e;
};

/// A-witness p becomes the B-program <e,p>.
inline const std::vector<Wiring>& wirings() {
    static const std::vector<Wiring> w{
        {Notion::K, Notion::Church, Combinator::halt2church},
        {Notion::Church, Notion::K, Combinator::church_extract},
        {Notion::Kinf, Notion::CardN, Combinator::stream2card},
        {Notion::CardN, Notion::Kinf, Combinator::card2stream},
        {Notion::Kprime, Notion::CardZ, Combinator::oracle2cardz},
        {Notion::CardZ, Notion::Kprime, Combinator::cardz2oracle},
        {Notion::Kprime_inf, Notion::Ord, Combinator::oraclestream2ord},
        {Notion::Ord, Notion::Kprime_inf, Combinator::ord2oraclestream},
        {Notion::K, Notion::Kinf, Combinator::halt2stream},
    };
    return w;
}

struct CtCheck {
    Int n;
    Word witness;
    Word compiled;
    std::optional<Int> got;
    std::string status;
    std::uint64_t budget;  // budget at which the compiled program reproduced n
    bool passed;
    bool sound;  // the A-row was not flagged
};

struct CtWitness {
    Notion a;
    Notion b;
    Combinator e;
    Word header;
    std::size_t c = 0;
    std::vector<CtCheck> checks;
    long long max_gap = 0;  // max over n of K_B(n) - K_A(n) as observed

    bool verified() const {
        return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CtCheck& k) { return k.passed; });
    }
    std::string range() const {
        if (checks.empty()) return "empty";
        Int lo = checks.front().n, hi = lo;
        for (const auto& k : checks) {
            lo = std::min(lo, k.n);
            hi = std::max(hi, k.n);
        }
        std::ostringstream os;
        os << lo << ".." << hi;
        return os.str();
    }
};

/// For each row (n, p) of table_A: <e,p> must evaluate to n under B. The
/// budget is doubled up to 64x before giving up. A certified wrong value is a
/// violation; a value that never settles counts as a failed check.
inline CtWitness check_ct(const Wiring& wiring, const EstimateTable& table_a, std::uint64_t budget,
                          const EvalOptions& opt, const EstimateTable* table_b = nullptr) {
    CtWitness out{wiring.a, wiring.b, wiring.e, header_word(wiring.e), overhead(wiring.e), {}, 0};
    bool first = true;
    for (const auto& [n, row] : table_a.rows) {
        CtCheck chk{n, row.witness, compile(wiring.e, row.witness), std::nullopt, "", 0, false, row.sound()};
        if (chk.compiled.size() != row.witness.size() + out.c) {
            throw CtViolation("compiled length breaks |<e,p>| = |p| + 2|e| + 1");
        }
        for (int k = 0; k <= 6 && !chk.passed; ++k) {
            const std::uint64_t b = budget << k;
            const EvalResult r = evaluate(wiring.b, chk.compiled, b, opt);
            chk.got = r.value;
            chk.status = r.label();
            chk.budget = b;
            if (r.acceptable() && *r.value == n) chk.passed = true;
            if (r.value && *r.value != n && r.status == Status::exact && !r.assumed) break;
        }
        long long ub_b = static_cast<long long>(chk.compiled.size());
        if (table_b) {
            if (auto u = table_b->ub(n)) ub_b = std::min(ub_b, static_cast<long long>(*u));
        }
        const long long gap = ub_b - static_cast<long long>(row.ub_length);
        out.max_gap = first ? gap : std::max(out.max_gap, gap);
        first = false;
        out.checks.push_back(std::move(chk));
    }
    return out;
}

inline std::string ledger_header() { return "notionA,notionB,header_bits,c,range,verified\n"; }

inline std::string ledger_row(const CtWitness& w) {
    std::ostringstream os;
    os << notion_name(w.a) << ',' << notion_name(w.b) << ',' << (w.header.empty() ? "-" : w.header.str()) << ','
       << w.c << ',' << w.range() << ',' << (w.verified() ? "true" : "false") << '\n';
    return os.str();
}

inline constexpr std::string_view kStrictnessDisclaimer =
    "NOT CERTIFIED: strict separations (K >ct Kinf >ct Kprime >ct Kprime_inf, and the >ct steps between the "
    "Church, CardN, CardZ and Ord complexities) are asymptotic statements about uncomputable functions. "
    "A finite table cannot certify them; only the <=ct directions above are machine-checked.";

/// Human-readable report: per-n upper bounds, the <=ct ledger and the
/// disclaimer about strict separations.
inline std::string hierarchy_report(const std::map<Notion, EstimateTable>& tables,
                                    const std::vector<CtWitness>& witnesses, std::size_t max_len,
                                    std::uint64_t budget) {
    std::ostringstream os;
    os << "Complexity upper bounds, all words of length <= " << max_len << ", budget " << budget << "\n\n";
    std::vector<Int> ns;
    for (const auto& [notion, t] : tables) {
        for (const auto& [n, row] : t.rows) ns.push_back(n);
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    os << "n";
    for (const auto& [notion, t] : tables) os << '\t' << notion_name(notion);
    os << '\n';
    for (const auto& n : ns) {
        os << n;
        for (const auto& [notion, t] : tables) {
            auto it = t.rows.find(n);
            os << '\t';
            if (it == t.rows.end()) {
                os << '-';
            } else {
                os << it->second.ub_length;
                if (!it->second.sound()) os << '*';
            }
        }
        os << '\n';
    }
    os << "(* = flagged row: assumed oracle answers or probe-only membership; excluded from ledger totals)\n\n";

    os << "<=ct ledger: K_B(n) <= K_A(n) + c via p -> <e,p>, c = 2|e| + 1\n";
    for (const auto& w : witnesses) {
        std::size_t sound = 0, sound_ok = 0, flagged = 0, flagged_ok = 0;
        for (const auto& k : w.checks) {
            (k.sound ? sound : flagged) += 1;
            if (k.passed) (k.sound ? sound_ok : flagged_ok) += 1;
        }
        os << "  K_" << notion_name(w.b) << " <= K_" << notion_name(w.a) << " + " << w.c << " via " << combinator_name(w.e)
           << " (e=" << w.header << "): n in " << w.range() << ", " << sound_ok << '/' << sound
           << " verified";
        if (flagged) os << " (+" << flagged_ok << '/' << flagged << " flagged)";
        os << ", max observed gap " << w.max_gap << (w.verified() ? "  OK" : "  FAILED") << '\n';
        for (const auto& k : w.checks) {
            if (!k.passed) {
                os << "    n=" << k.n << " witness=" << k.witness << " compiled=" << k.compiled << " got="
                   << (k.got ? k.got->str() : std::string("none")) << " (" << k.status << ")\n";
            }
        }
    }
    // Equalities double-checked by both directions.
    auto has = [&](Notion a, Notion b) {
        return std::any_of(witnesses.begin(), witnesses.end(),
                           [&](const CtWitness& w) { return w.a == a && w.b == b && w.verified(); });
    };
    os << "\n=ct pairs with both directions verified:";
    bool any = false;
    for (const auto& w : witnesses) {
        if (w.a < w.b && has(w.a, w.b) && has(w.b, w.a)) {
            os << ' ' << notion_name(w.a) << "=ct" << notion_name(w.b);
            any = true;
        }
    }
    if (!any) os << " none";
    os << "\n\nStrict separations (>ct): not desk-verifiable.\n" << kStrictnessDisclaimer << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
    std::vector<Notion> notions{kAllNotions.begin(), kAllNotions.end()};
    std::size_t max_len = 12;
    std::uint64_t budget = 10000;
    Int n_min = 0;
    Int n_max = 30;
    OracleMode oracle = OracleMode::registry;
    std::string registry;  // fixture directory; empty means the default
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// key=value lines; '#' starts a comment.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = rm::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = rm::trim(line.substr(0, eq));
        const std::string val = rm::trim(line.substr(eq + 1));
        try {
            if (key == "notions") {
                cfg.notions.clear();
                std::istringstream ns(val);
                for (std::string n; std::getline(ns, n, ',');) cfg.notions.push_back(parse_notion(rm::trim(n)));
            } else if (key == "max_len") {
                cfg.max_len = std::stoul(val);
            } else if (key == "budget") {
                cfg.budget = std::stoull(val);
            } else if (key == "n_min") {
                cfg.n_min = Int(val);
            } else if (key == "n_max") {
                cfg.n_max = Int(val);
            } else if (key == "oracle") {
                if (val == "registry") {
                    cfg.oracle = OracleMode::registry;
                } else if (val == "budgeted") {
                    cfg.oracle = OracleMode::budgeted;
                } else {
                    throw std::invalid_argument("oracle must be registry or budgeted");
                }
            } else if (key == "registry") {
                cfg.registry = val;
            } else if (key == "output_dir") {
                cfg.output_dir = val;
            } else if (key == "seed") {
                cfg.seed = std::stoull(val);
            } else if (key == "workers") {
                cfg.workers = static_cast<unsigned>(std::stoul(val));
            } else {
                throw std::invalid_argument("unknown key");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
        } catch (const std::out_of_range&) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): out of range");
        }
    }
    if (cfg.budget < 1) throw std::invalid_argument("budget must be at least 1");
    return cfg;
}

}  // namespace reprk
