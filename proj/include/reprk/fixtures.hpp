#pragma once

// Hand-written programs with known behaviour. The library is the source of
// truth; fixtures/*.prog, fixtures/manifest.tsv and fixtures/registry.txt are
// generated from it (`repr fixtures --write DIR`) and checked against it.

#include "reprk/dovetail.hpp"
#include "reprk/rm.hpp"
#include "reprk/universal.hpp"

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reprk::fixtures {

class FixtureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Fixture {
    std::string name;
    std::string mode;  // halt | stream | func | relation | effop | oracle | oracle-stream
    std::string flag;  // known-halting | known-divergent | -
    std::optional<std::uint64_t> domain_bound;
    std::vector<Answer> script;  // truthful oracle answers, in query order
    std::string behavior;        // expected observable, e.g. "5", "emits 3"
    std::string why;             // registry justification for divergent ones
    Word payload;

    Word word() const { return Word("1") + payload; }
};

inline Word program_word(const std::string& assembly) { return Word("1") + rm::assemble(assembly); }

namespace detail {

inline std::string repeat(const std::string& line, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) out += line + "\n";
    return out;
}

inline std::string literal(const Word& w) { return "b'" + w.str(); }

/// Halts iff input < k.
inline std::string below(int k) {
    return "INPUT 0, r0\nINPUT 0, r3\nLOADC r1, " + std::to_string(k) +
           "\nloop:\nDECJZ r1, out\nDECJZ r0, done\nDECJZ r2, loop\nout:\nDIVERGE\ndone:\nOUTPUT r3\n";
}

/// Halts iff input is even and < 2k.
inline std::string evens_below(int k) {
    return "INPUT 0, r0\nLOADC r1, " + std::to_string(2 * k) +
           "\nloop:\nDECJZ r1, out\nDECJZ r0, done\nDECJZ r1, out\nDECJZ r0, out\nDECJZ r2, loop\nout:\nDIVERGE\ndone:\nHALT\n";
}

/// Emits k times by a counted loop, then halts (or spins forever).
inline std::string loop_emitter(int k, bool spin) {
    std::string s = "LOADC r1, " + std::to_string(k) + "\nloop:\nDECJZ r1, end\nEMIT\nDECJZ r2, loop\nend:\n";
    s += spin ? "spin:\nINC r3\nDECJZ r2, spin\n" : "HALT\n";
    return s;
}

/// Halts exactly on the listed pairs. Each block tests one coordinate value
/// and jumps only locally, so any edge set fits the 6-bit jump offsets.
inline std::string relation(const std::set<std::pair<int, int>>& edges) {
    int xmax = -1;
    for (const auto& e : edges) xmax = std::max(xmax, e.first);
    std::ostringstream s;
    s << "INPUT 0, r0\nINPUT 1, r1\n";
    for (int x = 0; x <= xmax; ++x) {
        int ymax = -1;
        for (const auto& e : edges) {
            if (e.first == x) ymax = std::max(ymax, e.second);
        }
        s << "DECJZ r0, x" << x << "\nDECJZ r2, next" << x << "\nx" << x << ":\n";
        for (int y = 0; y <= ymax; ++y) {
            s << "DECJZ r1, x" << x << "y" << y << "\nDECJZ r2, x" << x << "n" << y << "\nx" << x << "y" << y
              << ":\n"
              << (edges.count({x, y}) ? "HALT\n" : "DIVERGE\n") << "x" << x << "n" << y << ":\n";
        }
        s << "DIVERGE\nnext" << x << ":\n";
    }
    s << "DIVERGE\n";
    return s.str();
}

}  // namespace detail

/// Relation program deciding (x,y) in `edges` (undefined elsewhere).
inline Word relation_program(const std::set<std::pair<int, int>>& edges) {
    return program_word(detail::relation(edges));
}

inline std::vector<Fixture> all() {
    using detail::repeat;
    std::vector<Fixture> out;
    auto add = [&](std::string name, std::string mode, std::string flag, const std::string& assembly,
                   std::string behavior, std::optional<std::uint64_t> bound = std::nullopt,
                   std::vector<Answer> script = {}, std::string why = "") {
        Fixture f;
        f.name = std::move(name);
        f.mode = std::move(mode);
        f.flag = std::move(flag);
        f.domain_bound = bound;
        f.script = std::move(script);
        f.behavior = std::move(behavior);
        f.why = std::move(why);
        f.payload = rm::assemble(assembly);
        out.push_back(std::move(f));
    };
    const auto Y = Answer::yes;
    const auto N = Answer::no;

    // Halting programs.
    add("output0", "halt", "known-halting", "OUTPUT r0\n", "0");
    add("output5", "halt", "known-halting", "LOADC r0, 5\nOUTPUT r0\n", "5");
    add("inc2", "halt", "known-halting", "INC r0\nINC r0\n", "2");
    add("self_loop", "halt", "known-divergent", "DIVERGE\n", "-", std::nullopt, {},
        "invalid opcode: the machine never leaves pc 0");
    add("busy_loop", "halt", "known-divergent", "spin:\nINC r1\nDECJZ r0, spin\n", "-", std::nullopt, {},
        "r0 stays 0 so DECJZ always jumps back while r1 grows");

    // Streams: 0..10 straight-line emitters, then counted loops.
    for (int k = 0; k <= 10; ++k) {
        add("emit" + std::to_string(k), "stream", "known-halting", repeat("EMIT", k) + "HALT\n",
            "emits " + std::to_string(k));
    }
    for (int k = 0; k <= 8; ++k) {
        const bool spin = k % 2 == 1;
        add("loop_emit" + std::to_string(k), "stream", spin ? "known-divergent" : "known-halting",
            detail::loop_emitter(k, spin), "emits " + std::to_string(k), std::nullopt, {},
            spin ? "spins on DECJZ of the always-zero r2 after the last EMIT" : "");
    }
    add("emit_forever", "stream", "known-divergent", "loop:\nEMIT\nDECJZ r2, loop\n", "emits infinity",
        std::nullopt, {}, "r2 stays 0 so the EMIT loop never exits");

    // Partial functions with declared domains.
    add("identity", "func", "-", "INPUT 0, r0\nOUTPUT r0\n", "domain infinite");
    add("everywhere_undefined", "func", "known-divergent", "DIVERGE\n", "domain 0", 0, {},
        "invalid opcode on every input");
    for (int k = 0; k <= 11; ++k) {
        add("dom" + std::to_string(k), "func", "-", detail::below(k), "domain " + std::to_string(k),
            static_cast<std::uint64_t>(k));
    }
    for (int k = 1; k <= 8; ++k) {
        add("evens" + std::to_string(k), "func", "-", detail::evens_below(k), "domain " + std::to_string(k),
            static_cast<std::uint64_t>(2 * k));
    }

    // Relations.
    add("rel_empty", "relation", "-", detail::relation({}), "ord 0", 0);
    add("rel_chain3", "relation", "-", detail::relation({{0, 1}, {1, 2}}), "ord 3", 3);
    add("rel_cycle2", "relation", "-", detail::relation({{0, 1}, {1, 0}}), "ord 1", 2);
    add("rel_fork", "relation", "-", detail::relation({{0, 1}, {0, 2}}), "ord undefined", 3);
    add("rel_cycle3", "relation", "-", detail::relation({{0, 1}, {1, 2}, {2, 0}}), "ord 1", 3);
    add("rel_chain4", "relation", "-", detail::relation({{0, 1}, {1, 2}, {2, 3}, {0, 3}}), "ord 4", 4);
    add("rel_self", "relation", "-", detail::relation({{1, 1}}), "ord 1", 2);

    // Effective operations.
    add("const_zero", "effop", "-", "HALT\n", "church undefined");
    add("apply_twice", "effop", "-", "INPUT 0, r0\nCALLARG r0\nCALLARG r0\nOUTPUT r0\n", "church 2");

    // Oracle programs with unary output (emissions plus OUTPUT value).
    const Word inc2 = Word("1") + rm::assemble("INC r0\nINC r0\n");
    const Word out0 = Word("1") + rm::assemble("OUTPUT r0\n");
    const Word loop = Word("1") + rm::assemble("DIVERGE\n");
    const std::string q_inc2 = "LOADC r1, " + detail::literal(inc2) + "\n";
    const std::string q_out0 = "LOADC r1, " + detail::literal(out0) + "\n";
    const std::string q_loop = "LOADC r1, " + detail::literal(loop) + "\n";

    add("o_emit2", "oracle", "known-halting", "EMIT\nEMIT\nHALT\n", "unary 2");
    add("o_emit0", "oracle", "known-halting", "HALT\n", "unary 0");
    add("q1", "oracle", "known-halting", q_inc2 + "QUERY r1, no\nEMIT\nHALT\nno:\nEMIT\nEMIT\nHALT\n", "unary 1",
        std::nullopt, {Y});
    add("q2", "oracle", "known-halting",
        q_inc2 + "QUERY r1, ano\nEMIT\nnext:\n" + q_loop + "QUERY r1, bno\nEMIT\nEMIT\nEMIT\nHALT\nbno:\nEMIT\nHALT\n" +
            "ano:\nEMIT\nEMIT\nEMIT\nEMIT\nHALT\n",
        "unary 2", std::nullopt, {Y, N});
    add("q3", "oracle", "known-halting",
        q_out0 + "QUERY r1, n1\nEMIT\nn1:\n" + q_loop + "QUERY r1, n2\nEMIT\nEMIT\nn2:\nEMIT\n" + q_inc2 +
            "QUERY r1, n3\nEMIT\nEMIT\nn3:\nHALT\n",
        "unary 4", std::nullopt, {Y, N, Y});
    add("q_output", "oracle", "known-halting",
        q_inc2 + "QUERY r1, no\nLOADC r0, 3\nOUTPUT r0\nno:\nLOADC r0, 5\nOUTPUT r0\n", "unary 3", std::nullopt, {Y});
    add("q_no", "oracle", "known-halting", q_loop + "QUERY r1, no\nEMIT\nEMIT\nEMIT\nHALT\nno:\nEMIT\nHALT\n",
        "unary 1", std::nullopt, {N});

    // Oracle streams.
    add("os_emit1", "oracle-stream", "known-halting", "EMIT\nHALT\n", "emits 1");
    add("os_emit2", "oracle-stream", "known-halting", "EMIT\nEMIT\nHALT\n", "emits 2");
    add("os_emit4", "oracle-stream", "known-halting", repeat("EMIT", 4) + "HALT\n", "emits 4");
    add("os_corrected", "oracle-stream", "known-halting",
        q_inc2 + "QUERY r1, no\nEMIT\nEMIT\nHALT\nno:\nEMIT\nEMIT\nEMIT\nHALT\n", "emits 2", std::nullopt, {Y});
    add("os_q2", "oracle-stream", "known-halting",
        q_loop + "QUERY r1, a\nEMIT\nEMIT\nEMIT\nEMIT\na:\nEMIT\n" + q_inc2 + "QUERY r1, b\nEMIT\nEMIT\nHALT\nb:\nEMIT\nEMIT\nEMIT\nHALT\n",
        "emits 3", std::nullopt, {N, Y});
    add("os_q3", "oracle-stream", "known-halting",
        q_out0 + "QUERY r1, a\nEMIT\na:\n" + q_inc2 + "QUERY r1, b\nEMIT\nb:\n" + q_loop +
            "QUERY r1, c\nEMIT\nEMIT\nEMIT\nc:\nEMIT\nHALT\n",
        "emits 3", std::nullopt, {Y, Y, N});
    return out;
}

inline const Fixture& get(const std::vector<Fixture>& fs, const std::string& name) {
    for (const auto& f : fs) {
        if (f.name == name) return f;
    }
    throw FixtureError("no fixture named '" + name + "'");
}

const Fixture& get(std::vector<Fixture>&&, const std::string&) = delete;

inline Fixture get(const std::string& name) {
    const auto fs = all();
    return get(fs, name);
}

inline std::string script_text(const std::vector<Answer>& script) {
    if (script.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < script.size(); ++i) {
        if (i) s += ',';
        s += script[i] == Answer::yes ? "YES" : "NO";
    }
    return s;
}

inline std::vector<Answer> parse_script(const std::string& text) {
    std::vector<Answer> out;
    if (text == "-" || text.empty()) return out;
    std::istringstream in(text);
    for (std::string tok; std::getline(in, tok, ',');) {
        if (tok == "YES") {
            out.push_back(Answer::yes);
        } else if (tok == "NO") {
            out.push_back(Answer::no);
        } else {
            throw FixtureError("bad oracle answer '" + tok + "'");
        }
    }
    return out;
}

/// Writes <name>.prog, manifest.tsv and registry.txt.
inline void write_all(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.tsv");
    std::ofstream registry(dir / "registry.txt");
    manifest << "name\tmode\tflag\tdomain\tscript\tbehavior\n";
    for (const auto& f : all()) {
        std::ofstream(dir / (f.name + ".prog")) << f.word() << '\n';
        manifest << f.name << '\t' << f.mode << '\t' << f.flag << '\t'
                 << (f.domain_bound ? std::to_string(*f.domain_bound) : "-") << '\t' << script_text(f.script) << '\t'
                 << f.behavior << '\n';
        if (f.flag == "known-divergent") registry << f.name << ": " << f.why << '\n';
    }
}

inline std::filesystem::path default_dir() {
    if (const char* env = std::getenv("REPRK_FIXTURES")) return env;
#ifdef REPRK_FIXTURE_DIR
    return REPRK_FIXTURE_DIR;
#else
    return "fixtures";
#endif
}

inline Word read_program(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FixtureError("cannot open program file " + path.string());
    std::string text, line;
    while (std::getline(in, line)) {
        for (char c : line) {
            if (c == '0' || c == '1') {
                text.push_back(c);
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                throw FixtureError("program file " + path.string() + " holds a non-binary character");
            }
        }
    }
    return Word(text);
}

struct ManifestRow {
    std::string name, mode, flag, domain, script, behavior;
};

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.tsv");
    if (!in) throw FixtureError("missing " + (dir / "manifest.tsv").string());
    std::vector<ManifestRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        for (std::string c; std::getline(ls, c, '\t');) cols.push_back(c);
        if (cols.size() != 6) throw FixtureError("malformed manifest line: " + line);
        rows.push_back({cols[0], cols[1], cols[2], cols[3], cols[4], cols[5]});
    }
    return rows;
}

/// Known-divergent programs from registry.txt plus domain bounds from the
/// manifest.
inline std::shared_ptr<Registry> load_registry(const std::filesystem::path& dir) {
    auto reg = std::make_shared<Registry>();
    std::ifstream in(dir / "registry.txt");
    if (!in) throw FixtureError("missing " + (dir / "registry.txt").string());
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (line.empty() || colon == std::string::npos) continue;
        const std::string name = line.substr(0, colon);
        reg->add_divergent(read_program(dir / (name + ".prog")), rm::trim(line.substr(colon + 1)));
    }
    for (const auto& row : read_manifest(dir)) {
        if (row.domain != "-") {
            reg->declare_domain_bound(read_program(dir / (row.name + ".prog")), std::stoull(row.domain));
        }
    }
    return reg;
}

/// Registry built directly from the library, without touching the disk.
inline std::shared_ptr<Registry> builtin_registry() {
    auto reg = std::make_shared<Registry>();
    for (const auto& f : all()) {
        if (f.flag == "known-divergent") reg->add_divergent(f.word(), f.why);
        if (f.domain_bound) reg->declare_domain_bound(f.word(), *f.domain_bound);
    }
    return reg;
}

}  // namespace reprk::fixtures
