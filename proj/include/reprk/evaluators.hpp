#pragma once

// Representation maps read off programs at a budget: halting value, unary
// stream count, card^N, card^Z, ord and the Church numeral of an effective
// operation. Each result carries how much of it is certain.

#include "reprk/dovetail.hpp"
#include "reprk/universal.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace reprk {

enum class Status : std::uint8_t {
    exact,      // certified: no further computation can change the value
    stable,     // nothing changed during the second half of the budget
    unstable,   // still changing at the end of the budget
    undefined,  // no value: did not halt, or the object is outside the domain
};

struct EvalResult {
    std::optional<Int> value;
    Status status = Status::undefined;
    bool assumed = false;  // relied on an uncertain oracle NO
    bool probed = false;   // Church membership checked on probes only
    std::uint64_t budget = 0;

    bool acceptable() const { return value && (status == Status::exact || status == Status::stable); }

    std::string label() const {
        switch (status) {
            case Status::undefined: return "undefined";
            case Status::unstable: return "unstable";
            default: break;
        }
        if (assumed) return "assumed";
        if (probed) return "probed";
        return status == Status::exact ? "exact" : "stable";
    }
};

inline bool window_stable(std::uint64_t last_change, std::uint64_t budget) {
    return last_change + (budget + 1) / 2 <= budget;
}

// ---------------------------------------------------------------------------
// Halting and streaming spaces

inline EvalResult eval_halting_machine(Machine& m, std::uint64_t budget) {
    EvalResult r;
    r.budget = budget;
    for (std::uint64_t s = 0; s < budget; ++s) {
        const Tick t = m.step();
        if (t == Tick::halt) {
            r.value = Int(*m.value());
            r.status = Status::exact;
            break;
        }
        if (t == Tick::stuck) break;
    }
    r.assumed = m.uncertain();
    return r;
}

inline EvalResult eval_stream_machine(Machine& m, std::uint64_t budget) {
    EvalResult r;
    r.budget = budget;
    std::uint64_t count = 0, last = 0;
    bool final = false;
    for (std::uint64_t s = 1; s <= budget; ++s) {
        const Tick t = m.step();
        if (t == Tick::emit) {
            ++count;
            last = s;
        } else if (t == Tick::halt || t == Tick::stuck) {
            final = true;
            break;
        }
    }
    r.value = Int(count);
    r.status = final ? Status::exact : window_stable(last, budget) ? Status::stable : Status::unstable;
    r.assumed = m.uncertain();
    return r;
}

/// K: value output by a halting program.
inline EvalResult eval_halt(const Word& w, std::uint64_t budget, const Context& ctx) {
    auto m = make_machine(Space::halt, w, ctx, budget);
    return eval_halting_machine(*m, budget);
}

/// K^inf: number of unary emissions of a possibly endless run.
inline EvalResult eval_stream(const Word& w, std::uint64_t budget, const Context& ctx) {
    auto m = make_machine(Space::stream, w, ctx, budget);
    return eval_stream_machine(*m, budget);
}

/// K': halting output relative to an oracle source.
inline EvalResult eval_oracle_halt(const Word& w, std::uint64_t budget, const Context& ctx, Oracle& oracle) {
    auto m = make_machine(Space::oracle_halt, w, ctx, budget, &oracle);
    return eval_halting_machine(*m, budget);
}

/// K'^inf: unary emissions relative to an oracle source.
inline EvalResult eval_oracle_stream(const Word& w, std::uint64_t budget, const Context& ctx, Oracle& oracle) {
    auto m = make_machine(Space::oracle_stream, w, ctx, budget, &oracle);
    return eval_stream_machine(*m, budget);
}

// ---------------------------------------------------------------------------
// Cardinals

struct DomainCount {
    std::uint64_t count = 0;
    std::uint64_t last_round = 0;  // round of the latest discovery
    bool complete = false;
    bool infinite = false;
    std::vector<Discovery> log;
};

/// Dovetails f for up to `budget` rounds, stopping early once the domain is
/// known in full.
inline DomainCount count_domain(const FunctionPtr& f, std::uint64_t budget) {
    DomainCount out;
    DovetailRun run(function_tasks(f), budget);
    Completion complete;
    while (run.rounds() < budget) {
        if (complete.check(run, *f)) {
            out.complete = true;
            break;
        }
        if (f->domain().kind == DomainInfo::Kind::infinite) {
            out.infinite = true;
            break;
        }
        if (run.round() > 0) out.last_round = run.rounds();
    }
    if (!out.complete && !out.infinite) out.complete = complete.check(run, *f);
    out.count = run.log().size();
    out.log = run.log();
    return out;
}

inline Status count_status(const DomainCount& c, std::uint64_t budget) {
    if (c.complete) return Status::exact;
    return window_stable(c.last_round, budget) ? Status::stable : Status::unstable;
}

/// card^N(f) = |domain(f)|.
inline EvalResult eval_card_N(const Word& w, std::uint64_t budget, const Context& ctx) {
    EvalResult r;
    r.budget = budget;
    const auto f = make_function(w, ctx, budget);
    const DomainCount c = count_domain(f, budget);
    if (c.infinite) return r;
    r.value = Int(c.count);
    r.status = count_status(c, budget);
    r.assumed = f->uncertain();
    return r;
}

/// card^Z(f,g) = |domain(f)| - |domain(g)|.
inline EvalResult eval_card_Z(const Word& w, std::uint64_t budget, const Context& ctx) {
    EvalResult r;
    r.budget = budget;
    const auto [f, g] = make_pair_program(w, ctx, budget);
    const DomainCount a = count_domain(f, budget);
    const DomainCount b = count_domain(g, budget);
    if (a.infinite || b.infinite) return r;
    r.value = Int(a.count) - Int(b.count);
    const Status sa = count_status(a, budget), sb = count_status(b, budget);
    r.status = std::max(sa, sb);
    return r;
}

// ---------------------------------------------------------------------------
// Ordinals

using EdgeSet = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

/// Number of classes of the preorder generated by `edges` when its quotient
/// is a total chain; nullopt otherwise. Tarjan's SCC on the incident
/// vertices, then a direct-edge check between consecutive classes of the
/// topological order.
inline std::optional<std::uint64_t> quotient_chain(const EdgeSet& edges) {
    std::map<std::uint64_t, std::size_t> id;
    for (const auto& [a, b] : edges) {
        id.emplace(a, id.size());
        id.emplace(b, id.size());
    }
    const std::size_t n = id.size();
    if (n == 0) return 0;
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [a, b] : edges) adj[id[a]].push_back(id[b]);

    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0, comps = 0;
    // Iterative Tarjan: frames of (vertex, next child position).
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < adj[v].size()) {
                const std::size_t u = adj[v][pos++];
                if (index[u] < 0) {
                    index[u] = low[u] = counter++;
                    stack.push_back(u);
                    on_stack[u] = true;
                    frames.emplace_back(u, 0);
                } else if (on_stack[u]) {
                    low[v] = std::min(low[v], index[u]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                while (true) {
                    const std::size_t u = stack.back();
                    stack.pop_back();
                    on_stack[u] = false;
                    comp[u] = comps;
                    if (u == v) break;
                }
                ++comps;
            }
            const std::size_t done = v;
            frames.pop_back();
            if (!frames.empty()) {
                const std::size_t parent = frames.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    // Tarjan numbers components in reverse topological order.
    std::set<std::pair<int, int>> cedges;
    for (std::size_t v = 0; v < n; ++v) {
        for (auto u : adj[v]) {
            if (comp[v] != comp[u]) cedges.emplace(comp[v], comp[u]);
        }
    }
    for (int c = comps - 1; c > 0; --c) {
        if (!cedges.count({c, c - 1})) return std::nullopt;
    }
    return static_cast<std::uint64_t>(comps);
}

/// Independent reference: boolean transitive closure, mutual-reachability
/// classes and a pairwise totality check.
inline std::optional<std::uint64_t> brute_quotient_oracle(const EdgeSet& edges) {
    std::vector<std::uint64_t> verts;
    for (const auto& [a, b] : edges) {
        verts.push_back(a);
        verts.push_back(b);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    const std::size_t n = verts.size();
    auto at = [&](std::uint64_t v) {
        return static_cast<std::size_t>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
    };
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) reach[i][i] = 1;
    for (const auto& [a, b] : edges) reach[at(a)][at(b)] = 1;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[k][j]) reach[i][j] = 1;
            }
        }
    }
    std::uint64_t classes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool first = true;
        for (std::size_t j = 0; j < i; ++j) {
            if (reach[i][j] && reach[j][i]) first = false;
        }
        if (first) ++classes;
        for (std::size_t j = 0; j < n; ++j) {
            if (!reach[i][j] && !reach[j][i]) return std::nullopt;
        }
    }
    return classes;
}

inline EdgeSet edges_of(const std::vector<Discovery>& log) {
    EdgeSet out;
    out.reserve(log.size());
    for (const auto& d : log) out.push_back(cantor_unpair(d.task));
    return out;
}

/// ord(f): order type of the quotient of the transitive closure of domain(f).
inline EvalResult eval_ord(const Word& w, std::uint64_t budget, const Context& ctx) {
    EvalResult r;
    r.budget = budget;
    const auto f = make_relation(w, ctx, budget);
    const DomainCount c = count_domain(f, budget);
    if (c.infinite) return r;
    const auto classes = quotient_chain(edges_of(c.log));
    if (!classes) return r;
    r.value = Int(*classes);
    r.status = count_status(c, budget);
    return r;
}

// ---------------------------------------------------------------------------
// Church numerals

struct Probe {
    std::string name;
    rm::ArgumentFn f;
    Nat x;
};

/// A finite partial function given by its graph.
inline rm::ArgumentFn table_function(std::map<Nat, Nat> table) {
    auto shared = std::make_shared<const std::map<Nat, Nat>>(std::move(table));
    return [shared](const Nat& x) -> std::optional<Nat> {
        auto it = shared->find(x);
        if (it == shared->end()) return std::nullopt;
        return it->second;
    };
}

/// x -> 2x on [0, limit], undefined above.
inline rm::ArgumentFn doubling_table(const Nat& limit) {
    return [limit](const Nat& x) -> std::optional<Nat> {
        if (x > limit) return std::nullopt;
        return 2 * x;
    };
}

/// Successor and doubling at x in {0,1,5}, plus two seeded random partial
/// tables on [0,64) at the same points.
inline std::vector<Probe> default_probes(std::uint64_t seed = 0) {
    std::vector<Probe> probes;
    const std::vector<Nat> points{0, 1, 5};
    const Nat doubling_limit = Nat(1) << 24;
    for (const auto& x : points) {
        probes.push_back({"succ@" + x.str(), successor, x});
        probes.push_back({"double@" + x.str(), doubling_table(doubling_limit), x});
    }
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 2; ++t) {
        std::map<Nat, Nat> table;
        for (int i = 0; i < 64; ++i) {
            if (rng() % 8 != 0) table.emplace(i, Nat(rng() % 64));
        }
        auto f = table_function(std::move(table));
        for (const auto& x : points) probes.push_back({"table" + std::to_string(t) + "@" + x.str(), f, x});
    }
    return probes;
}

/// f^n(x), or nullopt if some application is undefined.
inline std::optional<Nat> iterate(const rm::ArgumentFn& f, Nat x, const Nat& n) {
    for (Nat k = 0; k < n; ++k) {
        auto v = f(x);
        if (!v) return std::nullopt;
        x = std::move(*v);
    }
    return x;
}

/// Candidate n = F(successor)(0), then F(f)(x) = f^n(x) on every probe.
inline EvalResult eval_church_probe(const Word& w, const std::vector<Probe>& probes, std::uint64_t budget,
                                    const Context& ctx) {
    EvalResult r;
    r.budget = budget;
    auto extractor = make_machine(Space::effop, w, ctx, budget, nullptr, successor, 0);
    const EvalResult n = eval_halting_machine(*extractor, budget);
    if (!n.value) return r;
    const Nat count = Nat(*n.value);
    for (const auto& p : probes) {
        const auto expected = iterate(p.f, p.x, count);
        auto m = make_machine(Space::effop, w, ctx, budget, nullptr, p.f, p.x);
        const EvalResult got = eval_halting_machine(*m, budget);
        const bool pass = expected ? (got.value && Nat(*got.value) == *expected) : !got.value;
        if (!pass) return r;
    }
    r.value = *n.value;
    const Decoded d = universal_decode(w);
    // Pure iterator headers denote It_n by construction.
    const bool certified = (d.id == Combinator::iter && d.payload.empty()) || d.id == Combinator::halt2church;
    r.status = certified ? Status::exact : Status::stable;
    r.probed = !certified;
    return r;
}

}  // namespace reprk
