#pragma once

// The strongly universal machine U. A program is a word <e,p>; the header e
// selects a built-in combinator and p is its payload. The empty header runs p
// directly on the register machine.
//
// Programs are interpreted relative to a space (what kind of object the
// program denotes): halting output, unary stream, partial function, pair of
// partial functions, binary relation, oracle program or effective operation.

#include "reprk/dovetail.hpp"
#include "reprk/rm.hpp"
#include "reprk/word.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace reprk {

// ---------------------------------------------------------------------------
// Headers

enum class Combinator : std::uint8_t {
    raw,
    iter,
    negiter,
    halt2church,
    halt2stream,
    stream2card,
    card2stream,
    oracle2cardz,
    cardz2oracle,
    oraclestream2ord,
    ord2oraclestream,
    church_extract,
    unknown,
};

struct HeaderSpec {
    Combinator id;
    std::string_view name;
    std::string_view tag;
};

// Fixed headers. ITER(n) and NEGITER(n) are a tag followed by n in bijective
// binary; "0111" is unassigned.
inline constexpr std::string_view kIterTag = "00";
inline constexpr std::string_view kNegIterTag = "010";
inline constexpr std::array<HeaderSpec, 9> kFixedHeaders{{
    {Combinator::halt2church, "HALT2CHURCH", "0110"},
    {Combinator::halt2stream, "HALT2STREAM", "1000"},
    {Combinator::stream2card, "STREAM2CARD", "1001"},
    {Combinator::card2stream, "CARD2STREAM", "1010"},
    {Combinator::oracle2cardz, "ORACLE2CARDZ", "1011"},
    {Combinator::cardz2oracle, "CARDZ2ORACLE", "1100"},
    {Combinator::oraclestream2ord, "ORACLESTREAM2ORD", "1101"},
    {Combinator::ord2oraclestream, "ORD2ORACLESTREAM", "1110"},
    {Combinator::church_extract, "CHURCH_EXTRACT", "1111"},
}};

inline std::string_view combinator_name(Combinator id) {
    switch (id) {
        case Combinator::raw: return "RAW";
        case Combinator::iter: return "ITER";
        case Combinator::negiter: return "NEGITER";
        case Combinator::unknown: return "UNKNOWN";
        default: break;
    }
    for (const auto& h : kFixedHeaders) {
        if (h.id == id) return h.name;
    }
    return "UNKNOWN";
}

/// Header word of a combinator; `n` is only used by ITER and NEGITER.
inline Word header_word(Combinator id, const Nat& n = 0) {
    switch (id) {
        case Combinator::raw: return Word();
        case Combinator::iter: return Word(kIterTag) + nat_to_word(n);
        case Combinator::negiter: return Word(kNegIterTag) + nat_to_word(n);
        case Combinator::unknown: throw std::invalid_argument("no header for an unknown combinator");
        default: break;
    }
    for (const auto& h : kFixedHeaders) {
        if (h.id == id) return Word(h.tag);
    }
    throw std::invalid_argument("no header for combinator");
}

/// Additive constant c(e) = 2|e| + 1 of the compiler p -> <e,p>.
inline std::size_t overhead(Combinator id, const Nat& n = 0) { return 2 * header_word(id, n).size() + 1; }

inline Word compile(Combinator id, const Word& payload, const Nat& n = 0) {
    return couple_encode(header_word(id, n), payload);
}

/// Parses "STREAM2CARD", "ITER(3)", "NEGITER(1)", "RAW".
inline std::pair<Combinator, Nat> parse_combinator(std::string_view text) {
    std::string name(text);
    Nat n = 0;
    if (auto open = name.find('('); open != std::string::npos) {
        if (name.back() != ')') throw std::invalid_argument("bad combinator '" + name + "'");
        const std::string arg = name.substr(open + 1, name.size() - open - 2);
        if (arg.empty() || arg.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("bad combinator argument '" + arg + "'");
        }
        n = Nat(arg);
        name = name.substr(0, open);
    }
    if (name == "RAW") return {Combinator::raw, 0};
    if (name == "ITER") return {Combinator::iter, n};
    if (name == "NEGITER") return {Combinator::negiter, n};
    for (const auto& h : kFixedHeaders) {
        if (h.name == name) return {h.id, 0};
    }
    throw std::invalid_argument("unknown combinator '" + name + "'");
}

struct Decoded {
    Combinator id = Combinator::unknown;
    Nat n;
    Word header;
    Word payload;
};

/// Total. Undecodable words and unassigned headers come back as unknown,
/// which every space treats as the program that is defined nowhere.
inline Decoded universal_decode(const Word& w) {
    Decoded d;
    Pair pair;
    if (!try_couple_decode(w, pair)) return d;
    d.header = pair.header;
    d.payload = pair.payload;
    const std::string& h = pair.header.str();
    if (h.empty()) {
        d.id = Combinator::raw;
    } else if (h.rfind(kIterTag, 0) == 0) {
        d.id = Combinator::iter;
        d.n = word_to_nat(pair.header.substr(kIterTag.size()));
    } else if (h.rfind(kNegIterTag, 0) == 0) {
        d.id = Combinator::negiter;
        d.n = word_to_nat(pair.header.substr(kNegIterTag.size()));
    } else {
        for (const auto& spec : kFixedHeaders) {
            if (h == spec.tag) d.id = spec.id;
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// Machines

/// Evaluation-wide settings. `lookahead` is the step budget the oracle uses
/// for its searches; emulations that must answer searches size their inner
/// dovetails to cover it.
struct Context {
    std::shared_ptr<const Registry> registry;
    std::uint64_t lookahead = 0;
};

enum class Tick : std::uint8_t { none, emit, halt, stuck };

/// A program running in some space, advanced one tick at a time. `stuck`
/// means no further event can ever happen.
class Machine {
public:
    virtual ~Machine() = default;

    Tick step() {
        if (done_) return Tick::stuck;
        const Tick t = advance();
        if (t == Tick::halt) halted_ = true;
        if (t == Tick::halt || t == Tick::stuck) done_ = true;
        return t;
    }
    bool done() const noexcept { return done_; }
    bool halted() const noexcept { return halted_; }
    const std::optional<Nat>& value() const noexcept { return value_; }
    /// Some oracle reply this machine relied on was not certain.
    bool uncertain() const noexcept { return uncertain_; }

protected:
    virtual Tick advance() = 0;
    std::optional<Nat> value_;
    bool uncertain_ = false;

private:
    bool done_ = false;
    bool halted_ = false;
};

using MachinePtr = std::unique_ptr<Machine>;

class DeadMachine final : public Machine {
protected:
    Tick advance() override { return Tick::stuck; }
};

enum class Space : std::uint8_t { halt, stream, oracle_halt, oracle_unary, oracle_stream, effop };

inline std::optional<Nat> successor(const Nat& x) { return x + 1; }

MachinePtr make_machine(Space space, const Word& w, const Context& ctx, std::uint64_t horizon,
                        Oracle* oracle = nullptr, rm::ArgumentFn argument = {}, Nat input = 0);

/// "Program w halts" (w read in the halting space, no oracle).
class WordQuery final : public Query {
public:
    WordQuery(Word w, Context ctx) : w_(std::move(w)), ctx_(std::move(ctx)) {}

    SearchResult search(std::uint64_t cap) const override {
        auto m = make_machine(Space::halt, w_, ctx_, cap);
        for (std::uint64_t s = 1; s <= cap; ++s) {
            const Tick t = m->step();
            if (t == Tick::halt) return SearchResult{s, false};
            if (t == Tick::stuck) return SearchResult{std::nullopt, true};
        }
        return SearchResult{};
    }
    std::optional<Word> program() const override { return w_; }
    std::string describe() const override { return "halts(" + w_.str() + ")"; }

private:
    Word w_;
    Context ctx_;
};

class RmMachine final : public Machine {
public:
    RmMachine(const Word& payload, rm::Mode mode, std::vector<Nat> inputs, Context ctx, Oracle* oracle,
              rm::ArgumentFn argument)
        : code_(rm::decode(payload)), mode_(mode), ctx_(std::move(ctx)), oracle_(oracle) {
        state_.inputs = std::move(inputs);
        if (oracle_) {
            env_.oracle = [this](const Word& q) {
                return oracle_->ask(std::make_shared<WordQuery>(q, ctx_));
            };
        }
        env_.argument = std::move(argument);
    }

    const rm::MachineState& state() const noexcept { return state_; }

protected:
    Tick advance() override {
        const rm::StepEvent ev = rm::step(state_, code_, mode_, env_);
        uncertain_ = state_.uncertain;
        switch (ev) {
            case rm::StepEvent::running: return Tick::none;
            case rm::StepEvent::emitted: return Tick::emit;
            case rm::StepEvent::halted: value_ = state_.output; return Tick::halt;
            case rm::StepEvent::stuck:
            case rm::StepEvent::violation: return Tick::stuck;
        }
        return Tick::stuck;
    }

private:
    rm::Code code_;
    rm::Mode mode_;
    Context ctx_;
    Oracle* oracle_;
    rm::Env env_;
    rm::MachineState state_;
};

// ---------------------------------------------------------------------------
// Partial functions and relations

/// What is certain about the domain of a function program. `counted`
/// means the domain has exactly n points, `bounded` that every argument at
/// or above n (in any coordinate) is undefined.
struct DomainInfo {
    enum class Kind { unknown, bounded, counted, infinite };
    Kind kind = Kind::unknown;
    std::uint64_t n = 0;
};

class FunctionProgram {
public:
    virtual ~FunctionProgram() = default;
    virtual int arity() const = 0;
    /// Computation of f(x) (or f(x,y)); `cap` bounds the local steps it will get.
    virtual std::unique_ptr<Task> task(std::uint64_t x, std::uint64_t y, std::uint64_t cap) = 0;
    virtual DomainInfo domain() = 0;
    virtual bool uncertain() const { return false; }
};

using FunctionPtr = std::shared_ptr<FunctionProgram>;

/// Cantor pairing: index = d(d+1)/2 + y with d = x + y.
inline std::uint64_t cantor_pair(std::uint64_t x, std::uint64_t y) {
    const std::uint64_t d = x + y;
    return d * (d + 1) / 2 + y;
}
inline std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t i) {
    std::uint64_t d = static_cast<std::uint64_t>((std::sqrt(8.0L * static_cast<long double>(i) + 1) - 1) / 2);
    while (d * (d + 1) / 2 > i) --d;
    while ((d + 1) * (d + 2) / 2 <= i) ++d;
    const std::uint64_t y = i - d * (d + 1) / 2;
    return {d - y, y};
}

/// Task generator enumerating all arguments of f (pairs in Cantor order).
inline DovetailRun::Generator function_tasks(FunctionPtr f) {
    return [f = std::move(f)](std::uint64_t i, std::uint64_t cap) {
        if (f->arity() == 1) return f->task(i, 0, cap);
        const auto [x, y] = cantor_unpair(i);
        return f->task(x, y, cap);
    };
}

/// Decides, monotonically, when a dovetail over f has found everything.
class Completion {
public:
    bool check(const DovetailRun& run, FunctionProgram& f) {
        if (done_) return true;
        const DomainInfo info = f.domain();
        switch (info.kind) {
            case DomainInfo::Kind::counted: done_ = run.log().size() >= info.n; break;
            case DomainInfo::Kind::bounded: done_ = bounded(run, info.n, f.arity()); break;
            default: break;
        }
        return done_;
    }

private:
    bool bounded(const DovetailRun& run, std::uint64_t b, int arity) {
        if (b == 0) return true;
        if (arity == 1) {
            while (next_ < b && run.resolved(next_)) ++next_;
            return next_ >= b;
        }
        const std::uint64_t last = cantor_pair(b - 1, b - 1);
        while (next_ <= last) {
            const auto [x, y] = cantor_unpair(next_);
            if (x < b && y < b && !run.resolved(next_)) return false;
            ++next_;
        }
        return true;
    }

    bool done_ = false;
    std::uint64_t next_ = 0;
};

class DeadFunction final : public FunctionProgram {
public:
    explicit DeadFunction(int arity) : arity_(arity) {}
    int arity() const override { return arity_; }
    std::unique_ptr<Task> task(std::uint64_t, std::uint64_t, std::uint64_t) override {
        return FixedTask::diverges_at(1);
    }
    DomainInfo domain() override { return {DomainInfo::Kind::counted, 0}; }

private:
    int arity_;
};

class RmTask final : public Task {
public:
    RmTask(std::shared_ptr<const rm::Code> code, rm::Mode mode, std::vector<Nat> inputs)
        : code_(std::move(code)), mode_(mode) {
        state_.inputs = std::move(inputs);
    }
    std::uint64_t next_wake() const override { return state_.steps + 1; }
    TaskStatus run_until(std::uint64_t) override {
        switch (rm::step(state_, *code_, mode_, env_)) {
            case rm::StepEvent::halted: return TaskStatus{TaskStatus::Kind::halted, *state_.output};
            case rm::StepEvent::stuck:
            case rm::StepEvent::violation: return TaskStatus{TaskStatus::Kind::diverged, 0};
            default: return TaskStatus{};
        }
    }

private:
    std::shared_ptr<const rm::Code> code_;
    rm::Mode mode_;
    rm::Env env_;
    rm::MachineState state_;
};

class RmFunction final : public FunctionProgram {
public:
    RmFunction(const Word& word, const Word& payload, int arity, const Context& ctx, std::uint64_t horizon)
        : code_(std::make_shared<rm::Code>(rm::decode(payload))),
          mode_(arity == 1 ? rm::Mode::function() : rm::Mode::relation()),
          arity_(arity),
          horizon_(horizon) {
        if (ctx.registry) bound_ = ctx.registry->domain_bound(word);
    }

    int arity() const override { return arity_; }

    std::unique_ptr<Task> task(std::uint64_t x, std::uint64_t y, std::uint64_t) override {
        std::vector<Nat> in{Nat(x)};
        if (arity_ == 2) in.emplace_back(y);
        return std::make_unique<RmTask>(code_, mode_, std::move(in));
    }

    DomainInfo domain() override {
        if (!info_) info_ = compute_domain();
        return *info_;
    }

private:
    DomainInfo compute_domain() const {
        if (bound_) return {DomainInfo::Kind::bounded, *bound_};
        if (rm::reads_input(*code_)) return {};
        // Input-blind code behaves the same on every argument.
        rm::MachineState s;
        rm::Env env;
        while (s.steps < horizon_) {
            switch (rm::step(s, *code_, mode_, env)) {
                case rm::StepEvent::halted: return {DomainInfo::Kind::infinite, 0};
                case rm::StepEvent::stuck:
                case rm::StepEvent::violation: return {DomainInfo::Kind::counted, 0};
                default: break;
            }
        }
        return {};
    }

    std::shared_ptr<const rm::Code> code_;
    rm::Mode mode_;
    int arity_;
    std::uint64_t horizon_;
    std::optional<std::uint64_t> bound_;
    std::optional<DomainInfo> info_;
};

/// The emission pattern of a stream program, computed once and shared.
class StreamTrace {
public:
    explicit StreamTrace(MachinePtr m, std::uint64_t horizon) : m_(std::move(m)), horizon_(horizon) {}

    /// Make ticks 0..n-1 known (as far as the horizon allows).
    void ensure(std::uint64_t n) {
        n = std::min(n, horizon_);
        while (ticks_.size() < n && !final_) {
            const Tick t = m_->step();
            ticks_.push_back(t == Tick::emit);
            if (t == Tick::emit) ++total_;
            if (t == Tick::halt || t == Tick::stuck) final_ = true;
        }
    }
    std::uint64_t known() const noexcept { return ticks_.size(); }
    bool emitted_at(std::uint64_t t) const { return t < ticks_.size() && ticks_[t]; }
    bool final() const noexcept { return final_; }
    std::uint64_t total() const noexcept { return total_; }
    bool uncertain() const { return m_->uncertain(); }

private:
    MachinePtr m_;
    std::uint64_t horizon_;
    std::vector<bool> ticks_;
    std::uint64_t total_ = 0;
    bool final_ = false;
};

/// STREAM2CARD: t -> 1 if the stream emits at tick t, undefined otherwise.
/// The computation for t watches t+1 ticks, then answers or loops.
class Stream2Card final : public FunctionProgram {
public:
    explicit Stream2Card(std::shared_ptr<StreamTrace> trace) : trace_(std::move(trace)) {}
    int arity() const override { return 1; }
    std::unique_ptr<Task> task(std::uint64_t t, std::uint64_t, std::uint64_t cap) override {
        if (t + 1 > cap) return FixedTask::unknown();
        trace_->ensure(t + 1);
        if (trace_->emitted_at(t)) return FixedTask::halts_at(t + 1, 1);
        if (t < trace_->known() || trace_->final()) return FixedTask::diverges_at(t + 1);
        return FixedTask::unknown();
    }
    DomainInfo domain() override {
        if (trace_->final()) return {DomainInfo::Kind::counted, trace_->total()};
        return {};
    }

private:
    std::shared_ptr<StreamTrace> trace_;
};

// ---------------------------------------------------------------------------
// Harmless overshoot: run an oracle program answering NO to every query while
// verifying each NO by a search; a refuted NO restarts the program with the
// corrected answers.

class Overshoot : public Oracle {
public:
    struct Verification {
        std::uint64_t position;
        std::uint64_t issued;         // global step of the query
        std::uint64_t live_at_query;  // emissions of that run before the query
        std::uint64_t halts_at;       // global step of refutation, or kNever
        bool proven;                  // the NO is certainly right
    };
    struct Correction {
        std::uint64_t position;
        std::uint64_t issued;
        std::uint64_t step;
        std::uint64_t live_at_query;
    };

    Overshoot(Word program, Space space, Context ctx, std::uint64_t horizon)
        : program_(std::move(program)), space_(space), ctx_(std::move(ctx)), horizon_(horizon) {}
    Overshoot(const Overshoot&) = delete;
    Overshoot& operator=(const Overshoot&) = delete;

    OracleReply ask(const QueryPtr& q) override {
        const std::uint64_t k = asked_++;
        if (k < prefix_.size()) return OracleReply{prefix_[k], true};
        Verification v{k, g_, live_, kNever, false};
        const auto prog = q->program();
        if (prog && ctx_.registry && ctx_.registry->is_divergent(*prog)) {
            v.proven = true;
        } else {
            const SearchResult r = q->search(horizon_ > g_ ? horizon_ - g_ : 0);
            if (r.halt_step) v.halts_at = g_ + *r.halt_step;
            v.proven = r.proven_divergent;
        }
        pending_.emplace(k, v);
        return OracleReply{Answer::no, true};
    }

    /// Run global steps 0..n-1 (bounded by the horizon).
    void ensure(std::uint64_t n) {
        n = std::min(n, horizon_);
        if (!machine_) restart();
        while (g_ < n && !final()) global_step();
    }

    /// Nothing can change any more.
    bool final() const {
        if (!machine_ || !p_done_) return false;
        return std::all_of(pending_.begin(), pending_.end(), [](const auto& kv) { return kv.second.proven; });
    }
    std::uint64_t steps() const noexcept { return g_; }
    std::uint64_t horizon() const noexcept { return horizon_; }
    const std::vector<Answer>& prefix() const noexcept { return prefix_; }
    const std::vector<Correction>& corrections() const noexcept { return corrections_; }

    /// Called after every global step, for instrumented replays.
    std::function<void(const Overshoot&)> observer;

protected:
    virtual void on_emission(std::uint64_t g) = 0;
    virtual void on_correction(const Verification& v, std::uint64_t g) = 0;
    virtual void on_restart() {}

    std::uint64_t live_ = 0;  // emissions of the current run

private:
    void restart() {
        machine_ = make_machine(space_, program_, ctx_, horizon_, this);
        asked_ = 0;
        live_ = 0;
        unary_left_ = 0;
        p_done_ = false;
        on_restart();
    }

    void global_step() {
        const std::uint64_t g = g_;
        if (!p_done_) {
            if (unary_left_ > 0) {
                --unary_left_;
                ++live_;
                on_emission(g);
                if (unary_left_ == 0) p_done_ = true;
            } else {
                const Tick t = machine_->step();
                if (t == Tick::emit) {
                    ++live_;
                    on_emission(g);
                } else if (t == Tick::halt) {
                    // An OUTPUT v of a unary-output program counts as v emissions.
                    if (space_ == Space::oracle_unary && machine_->value() && *machine_->value() > 0) {
                        unary_left_ = *machine_->value();
                    } else {
                        p_done_ = true;
                    }
                } else if (t == Tick::stuck) {
                    p_done_ = true;
                }
            }
        }
        const Verification* hit = nullptr;
        for (const auto& [pos, v] : pending_) {
            if (v.halts_at == g) {
                hit = &v;
                break;  // smallest position wins; later ones are discarded below
            }
        }
        if (hit) {
            const Verification v = *hit;
            on_correction(v, g);
            corrections_.push_back(Correction{v.position, v.issued, g, v.live_at_query});
            std::vector<Answer> np(prefix_.begin(), prefix_.begin() + std::min<std::size_t>(v.position, prefix_.size()));
            np.resize(v.position, Answer::no);
            np.push_back(Answer::yes);
            prefix_ = std::move(np);
            pending_.erase(pending_.lower_bound(v.position), pending_.end());
            ++g_;
            restart();
        } else {
            ++g_;
        }
        if (observer) observer(*this);
    }

    Word program_;
    Space space_;
    Context ctx_;
    std::uint64_t horizon_;
    MachinePtr machine_;
    std::vector<Answer> prefix_;
    std::uint64_t asked_ = 0;
    std::map<std::uint64_t, Verification> pending_;
    std::vector<Correction> corrections_;
    std::uint64_t g_ = 0;
    Nat unary_left_ = 0;
    bool p_done_ = false;
};

/// ORACLE2CARDZ emulation. Each fresh emission adds its global step to D1;
/// a correction cancels the uncancelled D1 points emitted after the refuted
/// query, putting the same step numbers into D2. Replayed emissions of the
/// restarted run are credited against points that survived.
class OvershootCard final : public Overshoot {
public:
    OvershootCard(Word program, Context ctx, std::uint64_t horizon)
        : Overshoot(std::move(program), Space::oracle_unary, std::move(ctx), horizon) {}

    const std::vector<std::uint64_t>& d1() const noexcept { return d1_; }
    const std::map<std::uint64_t, std::uint64_t>& d2() const noexcept { return cancelled_; }
    /// Uncancelled points, in emission order.
    const std::vector<std::uint64_t>& live_points() const noexcept { return stack_; }
    bool in_d1(std::uint64_t t) const { return d1_set_.count(t) != 0; }
    std::optional<std::uint64_t> cancelled_at(std::uint64_t t) const {
        auto it = cancelled_.find(t);
        if (it == cancelled_.end()) return std::nullopt;
        return it->second;
    }

protected:
    void on_emission(std::uint64_t g) override {
        if (live_ <= stack_.size()) return;
        stack_.push_back(g);
        d1_.push_back(g);
        d1_set_.insert(g);
    }
    void on_correction(const Verification& v, std::uint64_t g) override {
        while (stack_.size() > v.live_at_query) {
            cancelled_.emplace(stack_.back(), g);
            stack_.pop_back();
        }
    }

private:
    std::vector<std::uint64_t> d1_;
    std::unordered_set<std::uint64_t> d1_set_;
    std::map<std::uint64_t, std::uint64_t> cancelled_;
    std::vector<std::uint64_t> stack_;
};

/// ORACLESTREAM2ORD emulation. X starts as {0}. The first emission of a run
/// makes 0 a vertex; each later one adds the point k = current global step
/// with edges (x,k) for every x in X. A correction adds all of X^2 (collapsing
/// the chain built so far into the class of 0) and resets X to {0}.
class OvershootOrd final : public Overshoot {
public:
    OvershootOrd(Word program, Context ctx, std::uint64_t horizon)
        : Overshoot(std::move(program), Space::oracle_stream, std::move(ctx), horizon) {}

    using Edge = std::pair<std::uint64_t, std::uint64_t>;
    const std::map<Edge, std::uint64_t>& edges() const noexcept { return edges_; }
    std::optional<std::uint64_t> edge_step(std::uint64_t x, std::uint64_t y) const {
        auto it = edges_.find({x, y});
        if (it == edges_.end()) return std::nullopt;
        return it->second;
    }

protected:
    void on_emission(std::uint64_t g) override {
        if (!first_done_) {
            first_done_ = true;
            zero_active_ = true;
            add(0, 0, g);
            return;
        }
        for (auto x : x_) add(x, g, g);
        x_.push_back(g);
    }
    void on_correction(const Verification&, std::uint64_t g) override {
        if (!zero_active_) return;
        for (auto a : x_) {
            for (auto b : x_) add(a, b, g);
        }
    }
    void on_restart() override {
        x_.assign(1, 0);
        first_done_ = false;
    }

private:
    void add(std::uint64_t a, std::uint64_t b, std::uint64_t g) { edges_.emplace(Edge{a, b}, g); }

    std::map<Edge, std::uint64_t> edges_;
    std::vector<std::uint64_t> x_{0};
    bool first_done_ = false;
    bool zero_active_ = false;
};

/// f1 or f2 of an ORACLE2CARDZ pair. f1 halts on t at local step t+1 when t
/// is in D1; f2 halts on t at local step c+1 when t was cancelled at step c.
class OvershootCardHalf final : public FunctionProgram {
public:
    OvershootCardHalf(std::shared_ptr<OvershootCard> em, bool second) : em_(std::move(em)), second_(second) {}
    int arity() const override { return 1; }

    std::unique_ptr<Task> task(std::uint64_t t, std::uint64_t, std::uint64_t cap) override {
        if (t + 1 > cap) return FixedTask::unknown();
        em_->ensure(t + 1);
        const bool seen = em_->steps() > t || em_->final();
        if (!em_->in_d1(t)) return seen ? FixedTask::diverges_at(t + 1) : FixedTask::unknown();
        if (!second_) return FixedTask::halts_at(t + 1, 1);
        em_->ensure(cap);
        if (auto c = em_->cancelled_at(t)) return FixedTask::halts_at(*c + 1, 1);
        if (em_->final()) return FixedTask::diverges_at(em_->steps() + 1);
        return FixedTask::unknown();
    }
    DomainInfo domain() override {
        if (!em_->final()) return {};
        return {DomainInfo::Kind::counted, second_ ? em_->d2().size() : em_->d1().size()};
    }

private:
    std::shared_ptr<OvershootCard> em_;
    bool second_;
};

class OvershootOrdRelation final : public FunctionProgram {
public:
    explicit OvershootOrdRelation(std::shared_ptr<OvershootOrd> em) : em_(std::move(em)) {}
    int arity() const override { return 2; }

    std::unique_ptr<Task> task(std::uint64_t x, std::uint64_t y, std::uint64_t cap) override {
        em_->ensure(cap);
        if (auto e = em_->edge_step(x, y); e && *e + 1 <= cap) return FixedTask::halts_at(*e + 1, 1);
        if (em_->final()) return FixedTask::diverges_at(em_->steps() + 1);
        return FixedTask::unknown();
    }
    DomainInfo domain() override {
        if (!em_->final()) return {};
        return {DomainInfo::Kind::counted, em_->edges().size()};
    }

private:
    std::shared_ptr<OvershootOrd> em_;
};

// ---------------------------------------------------------------------------
// Function-space factories

FunctionPtr make_function(const Word& w, const Context& ctx, std::uint64_t horizon);
FunctionPtr make_relation(const Word& w, const Context& ctx, std::uint64_t horizon);
std::pair<FunctionPtr, FunctionPtr> make_pair_program(const Word& w, const Context& ctx, std::uint64_t horizon);

inline FunctionPtr make_function(const Word& w, const Context& ctx, std::uint64_t horizon) {
    const Decoded d = universal_decode(w);
    switch (d.id) {
        case Combinator::raw: return std::make_shared<RmFunction>(w, d.payload, 1, ctx, horizon);
        case Combinator::stream2card:
            return std::make_shared<Stream2Card>(
                std::make_shared<StreamTrace>(make_machine(Space::stream, d.payload, ctx, horizon), horizon));
        default: return std::make_shared<DeadFunction>(1);
    }
}

inline FunctionPtr make_relation(const Word& w, const Context& ctx, std::uint64_t horizon) {
    const Decoded d = universal_decode(w);
    switch (d.id) {
        case Combinator::raw: return std::make_shared<RmFunction>(w, d.payload, 2, ctx, horizon);
        case Combinator::oraclestream2ord:
            return std::make_shared<OvershootOrdRelation>(std::make_shared<OvershootOrd>(d.payload, ctx, horizon));
        default: return std::make_shared<DeadFunction>(2);
    }
}

/// A RAW pair program's payload is <p1,p2> with p1, p2 function programs.
inline std::pair<FunctionPtr, FunctionPtr> make_pair_program(const Word& w, const Context& ctx,
                                                             std::uint64_t horizon) {
    const Decoded d = universal_decode(w);
    if (d.id == Combinator::raw) {
        Pair halves;
        if (try_couple_decode(d.payload, halves)) {
            return {make_function(halves.header, ctx, horizon), make_function(halves.payload, ctx, horizon)};
        }
    } else if (d.id == Combinator::oracle2cardz) {
        auto em = std::make_shared<OvershootCard>(d.payload, ctx, horizon);
        return {std::make_shared<OvershootCardHalf>(em, false), std::make_shared<OvershootCardHalf>(em, true)};
    }
    return {std::make_shared<DeadFunction>(1), std::make_shared<DeadFunction>(1)};
}

// ---------------------------------------------------------------------------
// Host machines

/// HALT2STREAM: run p; on output n emit n times, then halt.
class Halt2Stream final : public Machine {
public:
    explicit Halt2Stream(MachinePtr inner) : inner_(std::move(inner)) {}

protected:
    Tick advance() override {
        if (!inner_done_) {
            const Tick t = inner_->step();
            uncertain_ = inner_->uncertain();
            if (t == Tick::stuck) return Tick::stuck;
            if (t == Tick::halt) {
                inner_done_ = true;
                left_ = inner_->value().value_or(0);
            }
            return Tick::none;
        }
        if (left_ > 0) {
            --left_;
            return Tick::emit;
        }
        return Tick::halt;
    }

private:
    MachinePtr inner_;
    bool inner_done_ = false;
    Nat left_ = 0;
};

/// CARD2STREAM: dovetail q(0), q(1), ... and emit once per discovered halt.
class Card2Stream final : public Machine {
public:
    Card2Stream(FunctionPtr f, std::uint64_t horizon) : f_(f), run_(function_tasks(f), horizon) {}

protected:
    Tick advance() override {
        if (pending_ > 0) {
            --pending_;
            return Tick::emit;
        }
        if (complete_.check(run_, *f_)) return Tick::stuck;
        const std::size_t found = run_.round();
        if (found > 0) {
            pending_ = found - 1;
            return Tick::emit;
        }
        return Tick::none;
    }

private:
    FunctionPtr f_;
    DovetailRun run_;
    Completion complete_;
    std::uint64_t pending_ = 0;
};

/// Shared dovetail over a function program that queries can look ahead in.
struct SharedDovetail {
    SharedDovetail(FunctionPtr fn, std::uint64_t horizon) : f(fn), run(function_tasks(fn), horizon) {}
    FunctionPtr f;
    DovetailRun run;
    Completion complete;

    bool is_complete() { return complete.check(run, *f); }
    /// Discoveries made in rounds 1..r.
    std::uint64_t discovered_by(std::uint64_t r) const {
        const auto& log = run.log();
        return static_cast<std::uint64_t>(
            std::upper_bound(log.begin(), log.end(), r, [](std::uint64_t v, const Discovery& d) { return v < d.round; }) -
            log.begin());
    }
};

/// "Some computation of the pair not yet discovered by round r halts."
class PairRemainderQuery final : public Query {
public:
    PairRemainderQuery(std::shared_ptr<SharedDovetail> a, std::shared_ptr<SharedDovetail> b, std::uint64_t r)
        : a_(std::move(a)), b_(std::move(b)), r_(r) {}

    SearchResult search(std::uint64_t cap) const override {
        const std::uint64_t target = r_ + cap;
        a_->run.run_to(target);
        b_->run.run_to(target);
        std::optional<std::uint64_t> first;
        for (const auto* sd : {a_.get(), b_.get()}) {
            const auto& log = sd->run.log();
            const std::uint64_t i = sd->discovered_by(r_);
            if (i < log.size() && log[i].round <= target) {
                const std::uint64_t h = log[i].round - r_;
                first = first ? std::min(*first, h) : h;
            }
        }
        if (first) return SearchResult{first, false};
        const bool proven = a_->is_complete() && b_->is_complete();
        return SearchResult{std::nullopt, proven};
    }
    std::string describe() const override { return "pair-remainder-after-round(" + std::to_string(r_) + ")"; }

private:
    std::shared_ptr<SharedDovetail> a_, b_;
    std::uint64_t r_;
};

/// CARDZ2ORACLE: alternate a dovetail round of both halves with the question
/// whether any computation is still to halt; on NO output the difference of
/// the discovery counts (looping forever if it is negative).
class CardZ2Oracle final : public Machine {
public:
    CardZ2Oracle(std::pair<FunctionPtr, FunctionPtr> pair, std::uint64_t horizon, Oracle* oracle)
        : a_(std::make_shared<SharedDovetail>(pair.first, horizon)),
          b_(std::make_shared<SharedDovetail>(pair.second, horizon)),
          oracle_(oracle) {}

protected:
    Tick advance() override {
        if (!oracle_) return Tick::stuck;
        if (!query_next_) {
            ++r_;
            a_->run.run_to(r_);
            b_->run.run_to(r_);
            query_next_ = true;
            return Tick::none;
        }
        query_next_ = false;
        const OracleReply reply = oracle_->ask(std::make_shared<PairRemainderQuery>(a_, b_, r_));
        if (!reply.certain) uncertain_ = true;
        if (reply.answer == Answer::yes) return Tick::none;
        const Int diff = Int(a_->discovered_by(r_)) - Int(b_->discovered_by(r_));
        if (diff < 0) return Tick::stuck;
        value_ = Nat(diff);
        return Tick::halt;
    }

private:
    std::shared_ptr<SharedDovetail> a_, b_;
    Oracle* oracle_;
    std::uint64_t r_ = 0;
    bool query_next_ = false;
};

/// Reachability over the first m discovered edges of a relation.
class EdgeGraph {
public:
    EdgeGraph(const std::vector<Discovery>& log, std::size_t m) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto [x, y] = cantor_unpair(log[i].task);
            adj_[x].push_back(y);
            vertices_.insert(x);
            vertices_.insert(y);
        }
    }
    bool has_vertex(std::uint64_t v) const { return vertices_.count(v) != 0; }
    bool reaches(std::uint64_t from, std::uint64_t to) const {
        if (from == to) return has_vertex(from);
        std::unordered_set<std::uint64_t> seen{from};
        std::vector<std::uint64_t> stack{from};
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            auto it = adj_.find(v);
            if (it == adj_.end()) continue;
            for (auto u : it->second) {
                if (u == to) return true;
                if (seen.insert(u).second) stack.push_back(u);
            }
        }
        return false;
    }

private:
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> adj_;
    std::unordered_set<std::uint64_t> vertices_;
};

/// Chain questions asked by ORD2ORACLESTREAM about the domain of R:
/// comparable: t is a vertex comparable with every element of X;
/// equivalent: t lies in the same class as some element of X.
/// Both become true at some stage of the dovetail and stay true.
class ChainQuery final : public Query {
public:
    enum class Kind { comparable, equivalent };
    ChainQuery(std::shared_ptr<SharedDovetail> rel, Kind kind, std::uint64_t t, std::vector<std::uint64_t> xs)
        : rel_(std::move(rel)), kind_(kind), t_(t), xs_(std::move(xs)) {}

    bool holds(const EdgeGraph& g) const {
        if (kind_ == Kind::comparable) {
            if (!g.has_vertex(t_)) return false;
            return std::all_of(xs_.begin(), xs_.end(),
                               [&](std::uint64_t x) { return g.reaches(x, t_) || g.reaches(t_, x); });
        }
        return std::any_of(xs_.begin(), xs_.end(),
                           [&](std::uint64_t x) { return g.reaches(x, t_) && g.reaches(t_, x); });
    }

    SearchResult search(std::uint64_t cap) const override {
        rel_->run.run_to(cap);
        const auto& log = rel_->run.log();
        const std::size_t m = rel_->discovered_by(cap);
        if (!holds(EdgeGraph(log, m))) {
            return SearchResult{std::nullopt, m == log.size() && rel_->is_complete()};
        }
        std::size_t lo = 0, hi = m;  // holds at hi, not at lo
        if (holds(EdgeGraph(log, 0))) return SearchResult{1, false};
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo) / 2;
            (holds(EdgeGraph(log, mid)) ? hi : lo) = mid;
        }
        return SearchResult{log[hi - 1].round, false};
    }
    std::string describe() const override {
        return std::string(kind_ == Kind::comparable ? "comparable(" : "equivalent(") + std::to_string(t_) + ")";
    }

private:
    std::shared_ptr<SharedDovetail> rel_;
    Kind kind_;
    std::uint64_t t_;
    std::vector<std::uint64_t> xs_;
};

/// ORD2ORACLESTREAM: for t = 0, 1, ...: if t is comparable with all of X and
/// equivalent to none of them, emit and add t to X.
class Ord2OracleStream final : public Machine {
public:
    Ord2OracleStream(FunctionPtr rel, std::uint64_t horizon, Oracle* oracle)
        : rel_(std::make_shared<SharedDovetail>(rel, horizon)), oracle_(oracle) {}

protected:
    Tick advance() override {
        if (!oracle_) return Tick::stuck;
        switch (phase_) {
            case Phase::comparable: {
                if (rel_->is_complete() && beyond_vertices()) return Tick::stuck;
                const auto reply = ask(ChainQuery::Kind::comparable);
                if (reply == Answer::yes) {
                    phase_ = Phase::equivalent;
                } else {
                    ++t_;
                }
                return Tick::none;
            }
            case Phase::equivalent: {
                const auto reply = ask(ChainQuery::Kind::equivalent);
                if (reply == Answer::yes) {
                    ++t_;
                    phase_ = Phase::comparable;
                } else {
                    phase_ = Phase::emit;
                }
                return Tick::none;
            }
            case Phase::emit:
                xs_.push_back(t_);
                ++t_;
                phase_ = Phase::comparable;
                return Tick::emit;
        }
        return Tick::stuck;
    }

private:
    enum class Phase { comparable, equivalent, emit };

    Answer ask(ChainQuery::Kind kind) {
        const OracleReply r = oracle_->ask(std::make_shared<ChainQuery>(rel_, kind, t_, xs_));
        if (!r.certain) uncertain_ = true;
        return r.answer;
    }
    bool beyond_vertices() const {
        for (const auto& d : rel_->run.log()) {
            const auto [x, y] = cantor_unpair(d.task);
            if (x >= t_ || y >= t_) return false;
        }
        return true;
    }

    std::shared_ptr<SharedDovetail> rel_;
    Oracle* oracle_;
    std::uint64_t t_ = 0;
    std::vector<std::uint64_t> xs_;
    Phase phase_ = Phase::comparable;
};

/// It_n(f)(x): one application of f per tick, then halt.
class IterMachine final : public Machine {
public:
    IterMachine(rm::ArgumentFn f, Nat x, Nat n) : f_(std::move(f)), cur_(std::move(x)), left_(std::move(n)) {}

protected:
    Tick advance() override {
        if (left_ == 0) {
            value_ = cur_;
            return Tick::halt;
        }
        if (!f_) return Tick::stuck;
        auto v = f_(cur_);
        if (!v) return Tick::stuck;
        cur_ = std::move(*v);
        --left_;
        return Tick::none;
    }

private:
    rm::ArgumentFn f_;
    Nat cur_;
    Nat left_;
};

/// It_{-n}(f)(x): the first y, in dovetail discovery order, with f^n(y) = x.
class NegIterMachine final : public Machine {
public:
    NegIterMachine(rm::ArgumentFn f, Nat x, std::uint64_t n, std::uint64_t horizon)
        : x_(std::move(x)),
          run_(
              [f = std::move(f), n](std::uint64_t y, std::uint64_t) -> std::unique_ptr<Task> {
                  Nat cur = y;
                  for (std::uint64_t k = 0; k < n; ++k) {
                      auto v = f ? f(cur) : std::nullopt;
                      if (!v) return FixedTask::diverges_at(k + 1);
                      cur = std::move(*v);
                  }
                  return FixedTask::halts_at(n + 1, cur);
              },
              horizon) {}

protected:
    Tick advance() override {
        const std::size_t before = run_.log().size();
        run_.round();
        const auto& log = run_.log();
        for (std::size_t i = before; i < log.size(); ++i) {
            if (log[i].value == x_) {
                value_ = Nat(log[i].task);
                return Tick::halt;
            }
        }
        return Tick::none;
    }

private:
    Nat x_;
    DovetailRun run_;
};

/// HALT2CHURCH: run p; on output m behave as It_m.
class Halt2Church final : public Machine {
public:
    Halt2Church(MachinePtr inner, rm::ArgumentFn f, Nat x) : inner_(std::move(inner)), f_(std::move(f)), x_(std::move(x)) {}

protected:
    Tick advance() override {
        if (!iter_) {
            const Tick t = inner_->step();
            if (t == Tick::stuck) return Tick::stuck;
            if (t == Tick::halt) iter_ = std::make_unique<IterMachine>(f_, x_, inner_->value().value_or(0));
            return Tick::none;
        }
        const Tick t = iter_->step();
        if (t == Tick::halt) value_ = iter_->value();
        return t;
    }

private:
    MachinePtr inner_;
    rm::ArgumentFn f_;
    Nat x_;
    MachinePtr iter_;
};

/// Wraps an effective-operation machine applied to successor at 0.
class ChurchExtract final : public Machine {
public:
    explicit ChurchExtract(MachinePtr inner) : inner_(std::move(inner)) {}

protected:
    Tick advance() override {
        const Tick t = inner_->step();
        if (t == Tick::halt) value_ = inner_->value();
        return t == Tick::emit ? Tick::none : t;
    }

private:
    MachinePtr inner_;
};

inline MachinePtr make_machine(Space space, const Word& w, const Context& ctx, std::uint64_t horizon, Oracle* oracle,
                               rm::ArgumentFn argument, Nat input) {
    const Decoded d = universal_decode(w);
    const Context inner_ctx{ctx.registry, ctx.lookahead};
    const std::uint64_t wide = horizon + ctx.lookahead;
    switch (space) {
        case Space::halt:
            if (d.id == Combinator::raw) return std::make_unique<RmMachine>(d.payload, rm::Mode::halt(), std::vector<Nat>{}, ctx, nullptr, nullptr);
            if (d.id == Combinator::church_extract) {
                return std::make_unique<ChurchExtract>(
                    make_machine(Space::effop, d.payload, ctx, horizon, nullptr, successor, 0));
            }
            break;
        case Space::stream:
            if (d.id == Combinator::raw) return std::make_unique<RmMachine>(d.payload, rm::Mode::stream(), std::vector<Nat>{}, ctx, nullptr, nullptr);
            if (d.id == Combinator::halt2stream) return std::make_unique<Halt2Stream>(make_machine(Space::halt, d.payload, ctx, horizon));
            if (d.id == Combinator::card2stream) return std::make_unique<Card2Stream>(make_function(d.payload, ctx, horizon), horizon);
            break;
        case Space::oracle_halt:
        case Space::oracle_unary:
            if (d.id == Combinator::raw) {
                return std::make_unique<RmMachine>(
                    d.payload, space == Space::oracle_halt ? rm::Mode::oracle_halt() : rm::Mode::oracle_unary(),
                    std::vector<Nat>{}, ctx, oracle, nullptr);
            }
            if (d.id == Combinator::cardz2oracle) {
                return std::make_unique<CardZ2Oracle>(make_pair_program(d.payload, inner_ctx, wide), wide, oracle);
            }
            break;
        case Space::oracle_stream:
            if (d.id == Combinator::raw) return std::make_unique<RmMachine>(d.payload, rm::Mode::oracle_stream(), std::vector<Nat>{}, ctx, oracle, nullptr);
            if (d.id == Combinator::ord2oraclestream) {
                return std::make_unique<Ord2OracleStream>(make_relation(d.payload, inner_ctx, wide), wide, oracle);
            }
            break;
        case Space::effop:
            switch (d.id) {
                case Combinator::raw:
                    return std::make_unique<RmMachine>(d.payload, rm::Mode::effop(), std::vector<Nat>{std::move(input)}, ctx,
                                                       nullptr, std::move(argument));
                case Combinator::iter:
                    if (!d.payload.empty()) break;
                    return std::make_unique<IterMachine>(std::move(argument), std::move(input), d.n);
                case Combinator::negiter:
                    if (!d.payload.empty() || d.n > 64) break;
                    return std::make_unique<NegIterMachine>(std::move(argument), std::move(input),
                                                            static_cast<std::uint64_t>(d.n), horizon);
                case Combinator::halt2church:
                    return std::make_unique<Halt2Church>(make_machine(Space::halt, d.payload, ctx, horizon),
                                                         std::move(argument), std::move(input));
                default: break;
            }
            break;
    }
    return std::make_unique<DeadMachine>();
}

}  // namespace reprk
