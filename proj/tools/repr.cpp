// repr: command-line front end for the reprk library.
//
// Exit codes: 0 success, 2 usage or domain error, 3 missing fixture or
// registry, 4 a <=ct check failed.

#include "reprk/estimator.hpp"
#include "reprk/fixtures.hpp"
#include "reprk/numerals.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace reprk;
using namespace reprk::numerals;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PositionalSystem system_from(const std::string& name, int k) {
    if (name == "unary") return PositionalSystem::unary();
    if (k < 2) throw UsageError("--k must be at least 2 for " + name);
    if (name == "k-ary") return PositionalSystem::k_ary(k);
    if (name == "k-adic") return PositionalSystem::k_adic(k);
    if (name == "avizienis") return PositionalSystem::avizienis(k);
    throw UsageError("unknown system '" + name + "'");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw fixtures::FixtureError("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

std::shared_ptr<Registry> registry_from(const std::string& dir) {
    return fixtures::load_registry(dir.empty() ? fixtures::default_dir() : fs::path(dir));
}

rm::ArgumentFn argument_from(const std::string& name) {
    if (name == "succ") return successor;
    if (name == "double") return [](const Nat& x) -> std::optional<Nat> { return 2 * x; };
    if (name == "zero") return [](const Nat&) -> std::optional<Nat> { return Nat(0); };
    throw UsageError("unknown --arg '" + name + "' (succ, double, zero)");
}

std::string describe_halting(Machine& m, std::uint64_t budget) {
    for (std::uint64_t s = 0; s < budget; ++s) {
        const Tick t = m.step();
        if (t == Tick::halt) return "Halted " + m.value()->str() + (m.uncertain() ? " (assumed)" : "");
        if (t == Tick::stuck) return "Diverges (stuck)";
    }
    return "OutOfBudget";
}

std::string describe_stream(Machine& m, std::uint64_t budget) {
    const EvalResult r = eval_stream_machine(m, budget);
    std::string s = "Emitting " + r.value->str() + (r.status == Status::unstable ? " (unstable)" : " (stable)");
    if (r.assumed) s += " (assumed)";
    return s;
}

// Unary output: emissions plus the value of a final OUTPUT.
std::string describe_unary(Machine& m, std::uint64_t budget) {
    std::uint64_t emits = 0;
    for (std::uint64_t s = 0; s < budget; ++s) {
        const Tick t = m.step();
        if (t == Tick::emit) ++emits;
        if (t == Tick::halt) return "Unary " + (Nat(emits) + *m.value()).str();
        if (t == Tick::stuck) return "Diverges (stuck) after " + std::to_string(emits) + " emissions";
    }
    return "OutOfBudget";
}

std::string describe_task(Task& task, std::uint64_t budget) {
    while (task.next_wake() <= budget) {
        const TaskStatus st = task.run_until(task.next_wake());
        if (st.kind == TaskStatus::Kind::halted) return "Halted " + st.value.str();
        if (st.kind == TaskStatus::Kind::diverged) return "Diverges (stuck)";
    }
    return "OutOfBudget";
}

std::uint64_t to_u64(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw UsageError(std::string(what) + " must be a natural number");
    }
    return std::stoull(s);
}

struct RunArgs {
    std::string mode = "halt";
    std::uint64_t budget = 1000;
    std::vector<std::string> inputs;
    std::string oracle = "registry";
    std::string script;
    std::string arg = "succ";
    std::string fixtures;
    std::string file;
};

int cmd_run(const RunArgs& a) {
    const Word w = fixtures::read_program(a.file);
    Context ctx;
    auto input = [&](std::size_t i) -> std::uint64_t {
        if (i >= a.inputs.size()) throw UsageError("--mode " + a.mode + " needs " + std::to_string(i + 1) + " --input");
        return to_u64(a.inputs[i], "--input");
    };
    if (a.mode == "halt") {
        std::cout << describe_halting(*make_machine(Space::halt, w, ctx, a.budget), a.budget) << '\n';
    } else if (a.mode == "stream") {
        std::cout << describe_stream(*make_machine(Space::stream, w, ctx, a.budget), a.budget) << '\n';
    } else if (a.mode == "func" || a.mode == "relation") {
        ctx.registry = registry_from(a.fixtures);
        auto f = a.mode == "func" ? make_function(w, ctx, a.budget) : make_relation(w, ctx, a.budget);
        auto task = f->task(input(0), a.mode == "func" ? 0 : input(1), a.budget);
        std::cout << describe_task(*task, a.budget) << '\n';
    } else if (a.mode == "effop") {
        const Nat x = a.inputs.empty() ? Nat(0) : Nat(input(0));
        auto m = make_machine(Space::effop, w, ctx, a.budget, nullptr, argument_from(a.arg), x);
        std::cout << describe_halting(*m, a.budget) << '\n';
    } else if (a.mode == "oracle" || a.mode == "oracle-unary" || a.mode == "oracle-stream") {
        ctx.lookahead = a.budget;
        OracleSource src = OracleSource::budgeted_truth(a.budget);
        if (a.oracle == "script") {
            src = OracleSource::scripted(fixtures::parse_script(a.script));
        } else if (a.oracle == "registry") {
            ctx.registry = registry_from(a.fixtures);
            src = OracleSource::registry_augmented(a.budget, ctx.registry);
        } else if (a.oracle != "budgeted") {
            throw UsageError("--oracle must be registry, budgeted or script");
        }
        try {
            if (a.mode == "oracle") {
                std::cout << describe_halting(*make_machine(Space::oracle_halt, w, ctx, a.budget, &src), a.budget)
                          << '\n';
            } else if (a.mode == "oracle-unary") {
                std::cout << describe_unary(*make_machine(Space::oracle_unary, w, ctx, a.budget, &src), a.budget)
                          << '\n';
            } else {
                std::cout << describe_stream(*make_machine(Space::oracle_stream, w, ctx, a.budget, &src), a.budget)
                          << '\n';
            }
        } catch (const OracleExhausted&) {
            std::cout << "OracleExhausted\n";
        }
    } else {
        throw UsageError("unknown --mode '" + a.mode + "'");
    }
    return 0;
}

std::map<Notion, EstimateTable> build_tables(const ExperimentConfig& cfg, const EvalOptions& opt) {
    std::map<Notion, EstimateTable> tables;
    for (auto n : cfg.notions) {
        tables[n] = enumerate_estimate(n, cfg.max_len, cfg.budget, cfg.n_min, cfg.n_max, opt, cfg.workers);
    }
    return tables;
}

std::string tables_csv(const std::map<Notion, EstimateTable>& tables, const ExperimentConfig& cfg) {
    std::string csv = csv_header();
    for (auto n : cfg.notions) csv += to_csv(tables.at(n));
    return csv;
}

ExperimentConfig load_config(const std::string& path, unsigned workers_flag) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const fixtures::FixtureError&) {
        throw UsageError("cannot read config " + path);
    }
    ExperimentConfig cfg = parse_config(text);
    if (workers_flag > 0) cfg.workers = workers_flag;
    return cfg;
}

EvalOptions options_from(const ExperimentConfig& cfg) {
    EvalOptions opt;
    opt.registry = registry_from(cfg.registry);
    opt.oracle = cfg.oracle;
    opt.seed = cfg.seed;
    return opt;
}

int cmd_estimate(const std::string& config, unsigned workers) {
    const ExperimentConfig cfg = load_config(config, workers);
    const EvalOptions opt = options_from(cfg);
    const auto tables = build_tables(cfg, opt);
    const fs::path out = fs::path(cfg.output_dir) / "estimates.csv";
    write_file(out, tables_csv(tables, cfg));
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int cmd_hierarchy(const std::string& config, unsigned workers) {
    const ExperimentConfig cfg = load_config(config, workers);
    const EvalOptions opt = options_from(cfg);
    const auto tables = build_tables(cfg, opt);
    std::vector<CtWitness> witnesses;
    for (const auto& w : wirings()) {
        auto a = tables.find(w.a);
        if (a == tables.end() || !tables.count(w.b)) continue;
        witnesses.push_back(check_ct(w, a->second, cfg.budget, opt, &tables.at(w.b)));
    }
    std::string ledger = ledger_header();
    for (const auto& w : witnesses) ledger += ledger_row(w);
    const std::string report = hierarchy_report(tables, witnesses, cfg.max_len, cfg.budget);
    const fs::path dir(cfg.output_dir);
    write_file(dir / "estimates.csv", tables_csv(tables, cfg));
    write_file(dir / "ledger.csv", ledger);
    write_file(dir / "report.txt", report);
    std::cout << report;
    for (const auto& w : witnesses) {
        if (!w.verified()) {
            std::cerr << "error: K_" << notion_name(w.b) << " <= K_" << notion_name(w.a) << " + " << w.c
                      << " failed\n";
            return 4;
        }
    }
    return 0;
}

void print_combinator_table() {
    std::cout << "name,header_bits,c\n";
    auto row = [](Combinator id, const Nat& n, const std::string& name) {
        const Word h = header_word(id, n);
        std::cout << name << ',' << (h.empty() ? "-" : h.str()) << ',' << overhead(id, n) << '\n';
    };
    row(Combinator::raw, 0, "RAW");
    for (int n = 0; n <= 3; ++n) row(Combinator::iter, n, "ITER(" + std::to_string(n) + ")");
    for (int n = 0; n <= 3; ++n) row(Combinator::negiter, n, "NEGITER(" + std::to_string(n) + ")");
    for (const auto& h : kFixedHeaders) row(h.id, 0, std::string(h.name));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Representation-complexity toolkit: numerals, register machines, combinators, estimates"};
    app.require_subcommand(1);
    unsigned workers = 0;
    app.add_option("--workers", workers, "Worker threads for enumeration (overrides the config)");

    // numerals
    auto* numeral = app.add_subcommand("numeral", "Positional numerals, four squares, prime sums");
    numeral->require_subcommand(1);
    std::string system = "k-ary", value_text;
    int k = 2;
    auto add_numeral_cmds = [&](CLI::App* parent) {
        auto* enc = parent->add_subcommand("encode", "Value to canonical digits");
        enc->add_option("--system", system)->check(CLI::IsMember({"k-ary", "k-adic", "avizienis", "unary"}));
        enc->add_option("--k", k);
        enc->add_option("value", value_text)->required();
        auto* dec = parent->add_subcommand("decode", "Digits to value");
        dec->add_option("--system", system)->check(CLI::IsMember({"k-ary", "k-adic", "avizienis", "unary"}));
        dec->add_option("--k", k);
        dec->add_option("digits", value_text)->required();
        return std::pair{enc, dec};
    };
    auto [num_enc, num_dec] = add_numeral_cmds(numeral);
    auto [top_enc, top_dec] = add_numeral_cmds(&app);
    auto* foursq = numeral->add_subcommand("foursquares", "Lagrange four-square decomposition");
    foursq->add_option("n", value_text)->required();
    auto* primesum = numeral->add_subcommand("primesum", "Shortest sum of primes");
    primesum->add_option("n", value_text)->required();

    // programs
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a program file");
    run->add_option("--mode", run_args.mode, "halt|stream|func|relation|effop|oracle|oracle-unary|oracle-stream");
    run->add_option("--budget", run_args.budget);
    run->add_option("--input", run_args.inputs, "Input (repeat for relations)");
    run->add_option("--oracle", run_args.oracle, "registry|budgeted|script");
    run->add_option("--script", run_args.script, "Oracle answers, e.g. YES,NO");
    run->add_option("--arg", run_args.arg, "Function argument for effop: succ|double|zero");
    run->add_option("--fixtures", run_args.fixtures, "Fixture directory holding registry.txt");
    run->add_option("program", run_args.file)->required();

    std::string combinator, program;
    auto* comp = app.add_subcommand("compile", "Print <e,p> for a combinator e");
    comp->add_option("--combinator", combinator)->required();
    comp->add_option("program", program)->required();

    auto* disasm = app.add_subcommand("disasm", "Disassemble a program file");
    disasm->add_option("program", program)->required();

    std::string config;
    auto* estimate = app.add_subcommand("estimate", "Tabulate complexity upper bounds");
    estimate->add_option("--config", config)->required();
    auto* hierarchy = app.add_subcommand("hierarchy", "Tables, <=ct ledger and report");
    hierarchy->add_option("--config", config)->required();

    bool table = false;
    auto* combos = app.add_subcommand("combinators", "List combinator headers");
    combos->add_flag("--table", table, "CSV of name, header bits and c(e)");

    std::string fixture_out;
    auto* fix = app.add_subcommand("fixtures", "Write the fixture corpus");
    fix->add_option("--write", fixture_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (num_enc->parsed() || top_enc->parsed()) {
            const auto sys = system_from(system, k);
            std::cout << format_digits(sys, value_to_digits(sys, Int(value_text))) << '\n';
        } else if (num_dec->parsed() || top_dec->parsed()) {
            const auto sys = system_from(system, k);
            std::cout << digits_to_value(sys, parse_digits(value_text)) << '\n';
        } else if (foursq->parsed()) {
            const auto r = four_squares(std::stoll(value_text));
            std::cout << r.x << ' ' << r.y << ' ' << r.z << ' ' << r.t << '\n';
        } else if (primesum->parsed()) {
            const auto parts = prime_sum(std::stoll(value_text));
            for (std::size_t i = 0; i < parts.size(); ++i) std::cout << (i ? " " : "") << parts[i];
            std::cout << '\n';
        } else if (run->parsed()) {
            return cmd_run(run_args);
        } else if (comp->parsed()) {
            const auto [id, n] = parse_combinator(combinator);
            std::cout << compile(id, fixtures::read_program(program), n) << '\n';
        } else if (disasm->parsed()) {
            const Decoded d = universal_decode(fixtures::read_program(program));
            if (d.id == Combinator::raw) {
                std::cout << rm::disassemble(rm::decode(d.payload));
            } else {
                std::cout << "; header " << combinator_name(d.id) << ", payload " << d.payload << '\n';
            }
        } else if (estimate->parsed()) {
            return cmd_estimate(config, workers);
        } else if (hierarchy->parsed()) {
            return cmd_hierarchy(config, workers);
        } else if (combos->parsed()) {
            print_combinator_table();
        } else if (fix->parsed()) {
            fixtures::write_all(fixture_out);
            std::cout << "wrote " << fixtures::all().size() << " fixtures to " << fixture_out << '\n';
        }
    } catch (const fixtures::FixtureError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const CtViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        // Numeral domain errors, malformed words, bad configs and bad numbers.
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
