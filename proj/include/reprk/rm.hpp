#pragma once

// The payload language: a deterministic, step-counted register machine with
// four unbounded registers.
//
// Encoding (bit-exact, most significant bit first):
//   opcode 4 bits | register 2 bits | offset 6 bits two's complement
//   0000 HALT
//   0001 INC r
//   0010 DECJZ r,d     decrement r, or jump d instructions if r is zero
//   0011 EMIT
//   0100 INPUT j,r     j is a 1-bit input slot
//   0101 OUTPUT r
//   0110 QUERY r,d     ask the oracle about program nat_to_word(r); jump d on NO
//   0111 CALLARG r     r <- f(r) for the type-2 argument f
//   1000 LOADC r,w     4-bit length, then the bits of w; r <- word_to_nat(w)
//   1001..1111         invalid: the machine loops forever on it
// A trailing partial instruction also loops forever once reached. Running off
// the end of the code is an implicit HALT.

#include "reprk/word.hpp"

#include <array>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reprk {

/// Executing EMIT, QUERY, CALLARG or OUTPUT in a mode that forbids it.
class ModeViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scripted oracle ran out of answers.
class OracleExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Answer : std::uint8_t { no, yes };

struct OracleReply {
    Answer answer;
    bool certain;
};

}  // namespace reprk

namespace reprk::rm {

constexpr int kRegisters = 4;
constexpr int kOffsetBits = 6;
constexpr int kMinOffset = -(1 << (kOffsetBits - 1));
constexpr int kMaxOffset = (1 << (kOffsetBits - 1)) - 1;
constexpr std::size_t kMaxLiteral = 15;

enum class Op : std::uint8_t {
    halt = 0,
    inc = 1,
    decjz = 2,
    emit = 3,
    input = 4,
    output = 5,
    query = 6,
    callarg = 7,
    loadc = 8,
    invalid,
    partial,
};

struct Instruction {
    Op op = Op::halt;
    std::uint8_t reg = 0;
    std::uint8_t slot = 0;
    int offset = 0;
    Word literal;
    std::uint8_t opcode = 0;  // raw 4-bit code, kept for invalid instructions

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

using Code = std::vector<Instruction>;

inline Instruction make_instruction(Op op) {
    Instruction ins;
    ins.op = op;
    if (op <= Op::loadc) ins.opcode = static_cast<std::uint8_t>(op);
    return ins;
}

namespace detail {
inline unsigned read_bits(const Word& w, std::size_t& pos, std::size_t n) {
    unsigned v = 0;
    for (std::size_t i = 0; i < n; ++i) v = (v << 1) | (w[pos + i] ? 1u : 0u);
    pos += n;
    return v;
}
inline void write_bits(std::string& out, unsigned v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(((v >> (n - 1 - i)) & 1u) ? '1' : '0');
}
}  // namespace detail

/// Total decoder. A truncated trailing instruction decodes to Op::partial.
inline Code decode(const Word& payload) {
    Code code;
    std::size_t pos = 0;
    const std::size_t n = payload.size();
    auto need = [&](std::size_t bits) { return pos + bits <= n; };
    while (pos < n) {
        if (!need(4)) {
            code.push_back(make_instruction(Op::partial));
            break;
        }
        Instruction ins;
        ins.opcode = static_cast<std::uint8_t>(detail::read_bits(payload, pos, 4));
        const unsigned opc = ins.opcode;
        bool truncated = false;
        switch (opc) {
            case 0: ins.op = Op::halt; break;
            case 3: ins.op = Op::emit; break;
            case 1:
            case 5:
            case 7:
                ins.op = opc == 1 ? Op::inc : opc == 5 ? Op::output : Op::callarg;
                if (!need(2)) { truncated = true; break; }
                ins.reg = static_cast<std::uint8_t>(detail::read_bits(payload, pos, 2));
                break;
            case 2:
            case 6: {
                ins.op = opc == 2 ? Op::decjz : Op::query;
                if (!need(2 + kOffsetBits)) { truncated = true; break; }
                ins.reg = static_cast<std::uint8_t>(detail::read_bits(payload, pos, 2));
                const unsigned raw = detail::read_bits(payload, pos, kOffsetBits);
                ins.offset = raw >= (1u << (kOffsetBits - 1)) ? static_cast<int>(raw) - (1 << kOffsetBits)
                                                               : static_cast<int>(raw);
                break;
            }
            case 4:
                ins.op = Op::input;
                if (!need(3)) { truncated = true; break; }
                ins.slot = static_cast<std::uint8_t>(detail::read_bits(payload, pos, 1));
                ins.reg = static_cast<std::uint8_t>(detail::read_bits(payload, pos, 2));
                break;
            case 8: {
                ins.op = Op::loadc;
                if (!need(6)) { truncated = true; break; }
                ins.reg = static_cast<std::uint8_t>(detail::read_bits(payload, pos, 2));
                const unsigned len = detail::read_bits(payload, pos, 4);
                if (!need(len)) { truncated = true; break; }
                ins.literal = payload.substr(pos, len);
                pos += len;
                break;
            }
            default: ins.op = Op::invalid; break;
        }
        if (truncated) {
            code.push_back(make_instruction(Op::partial));
            break;
        }
        code.push_back(std::move(ins));
    }
    return code;
}

/// Inverse of decode for well-formed code.
inline Word encode(const Code& code) {
    std::string out;
    for (const auto& ins : code) {
        switch (ins.op) {
            case Op::halt: detail::write_bits(out, 0, 4); break;
            case Op::emit: detail::write_bits(out, 3, 4); break;
            case Op::inc:
            case Op::output:
            case Op::callarg:
                detail::write_bits(out, static_cast<unsigned>(ins.op), 4);
                detail::write_bits(out, ins.reg, 2);
                break;
            case Op::decjz:
            case Op::query:
                if (ins.offset < kMinOffset || ins.offset > kMaxOffset) {
                    throw std::invalid_argument("jump offset does not fit in 6 bits");
                }
                detail::write_bits(out, static_cast<unsigned>(ins.op), 4);
                detail::write_bits(out, ins.reg, 2);
                detail::write_bits(out, static_cast<unsigned>(ins.offset) & ((1u << kOffsetBits) - 1),
                                   kOffsetBits);
                break;
            case Op::input:
                detail::write_bits(out, 4, 4);
                detail::write_bits(out, ins.slot, 1);
                detail::write_bits(out, ins.reg, 2);
                break;
            case Op::loadc:
                if (ins.literal.size() > kMaxLiteral) {
                    throw std::invalid_argument("LOADC literal longer than 15 bits");
                }
                detail::write_bits(out, 8, 4);
                detail::write_bits(out, ins.reg, 2);
                detail::write_bits(out, static_cast<unsigned>(ins.literal.size()), 4);
                out += ins.literal.str();
                break;
            case Op::invalid: detail::write_bits(out, ins.opcode >= 9 ? ins.opcode : 15, 4); break;
            case Op::partial: throw std::invalid_argument("cannot encode a partial instruction");
        }
    }
    return Word(out);
}

inline bool reads_input(const Code& code) {
    for (const auto& ins : code) {
        if (ins.op == Op::input) return true;
    }
    return false;
}

/// What a run is allowed to do. Instructions outside the mode are violations.
struct Mode {
    std::string_view name;
    bool emit = false;     // EMIT legal
    bool output = false;   // OUTPUT legal; HALT yields regs[0]
    bool query = false;    // QUERY legal
    bool callarg = false;  // CALLARG legal
    int inputs = 0;

    static constexpr Mode halt() { return {"halt", false, true, false, false, 0}; }
    static constexpr Mode stream() { return {"stream", true, false, false, false, 0}; }
    static constexpr Mode function() { return {"func", false, true, false, false, 1}; }
    static constexpr Mode relation() { return {"relation", false, true, false, false, 2}; }
    static constexpr Mode effop() { return {"effop", false, true, false, true, 1}; }
    static constexpr Mode oracle_halt() { return {"oracle", false, true, true, false, 0}; }
    static constexpr Mode oracle_stream() { return {"oracle-stream", true, false, true, false, 0}; }
    /// Oracle program whose output counts as unary: EMITs plus an OUTPUT value.
    static constexpr Mode oracle_unary() { return {"oracle-unary", true, true, true, false, 0}; }
};

using OracleFn = std::function<OracleReply(const Word&)>;
using ArgumentFn = std::function<std::optional<Nat>(const Nat&)>;

struct Env {
    OracleFn oracle;
    ArgumentFn argument;
};

struct MachineState {
    std::size_t pc = 0;
    std::array<Nat, kRegisters> regs{};
    std::uint64_t steps = 0;
    std::uint64_t emits = 0;
    std::uint64_t last_emit_step = 0;  // step number of the latest EMIT, 0 if none
    std::vector<Nat> inputs;
    bool halted = false;
    bool stuck = false;  // provably looping forever
    bool uncertain = false;  // some oracle reply was not certain
    std::optional<Nat> output;
};

enum class StepEvent : std::uint8_t { running, emitted, halted, stuck, violation };

/// One step. A stuck machine stays stuck; a halted machine must not be stepped.
inline StepEvent step(MachineState& s, const Code& code, const Mode& mode, const Env& env) {
    if (s.stuck) {
        ++s.steps;
        return StepEvent::stuck;
    }
    ++s.steps;
    auto get_stuck = [&] {
        s.stuck = true;
        return StepEvent::stuck;
    };
    auto jump = [&](int offset) {
        const auto target = static_cast<long long>(s.pc) + offset;
        if (target < 0 || target > static_cast<long long>(code.size())) return false;
        s.pc = static_cast<std::size_t>(target);
        return true;
    };
    if (s.pc >= code.size()) {
        s.halted = true;
        if (mode.output) s.output = s.regs[0];
        return StepEvent::halted;
    }
    const Instruction& ins = code[s.pc];
    switch (ins.op) {
        case Op::halt:
            s.halted = true;
            if (mode.output) s.output = s.regs[0];
            return StepEvent::halted;
        case Op::inc:
            s.regs[ins.reg] += 1;
            ++s.pc;
            return StepEvent::running;
        case Op::decjz:
            if (s.regs[ins.reg] == 0) {
                if (ins.offset == 0 || !jump(ins.offset)) return get_stuck();
            } else {
                s.regs[ins.reg] -= 1;
                ++s.pc;
            }
            return StepEvent::running;
        case Op::emit:
            if (!mode.emit) return StepEvent::violation;
            ++s.emits;
            s.last_emit_step = s.steps;
            ++s.pc;
            return StepEvent::emitted;
        case Op::input:
            s.regs[ins.reg] = ins.slot < s.inputs.size() ? s.inputs[ins.slot] : Nat(0);
            ++s.pc;
            return StepEvent::running;
        case Op::output:
            if (!mode.output) return StepEvent::violation;
            s.halted = true;
            s.output = s.regs[ins.reg];
            return StepEvent::halted;
        case Op::query: {
            if (!mode.query || !env.oracle) return StepEvent::violation;
            const OracleReply reply = env.oracle(nat_to_word(s.regs[ins.reg]));
            if (!reply.certain) s.uncertain = true;
            if (reply.answer == Answer::no) {
                if (!jump(ins.offset)) return get_stuck();
            } else {
                ++s.pc;
            }
            return StepEvent::running;
        }
        case Op::callarg: {
            if (!mode.callarg || !env.argument) return StepEvent::violation;
            auto v = env.argument(s.regs[ins.reg]);
            if (!v) return get_stuck();
            s.regs[ins.reg] = std::move(*v);
            ++s.pc;
            return StepEvent::running;
        }
        case Op::loadc:
            s.regs[ins.reg] = word_to_nat(ins.literal);
            ++s.pc;
            return StepEvent::running;
        case Op::invalid:
        case Op::partial: return get_stuck();
    }
    return get_stuck();
}

struct RunOutcome {
    enum class Kind { halted, emitting, out_of_budget, oracle_exhausted };
    Kind kind = Kind::out_of_budget;
    std::optional<Nat> value;
    std::uint64_t emits = 0;
    bool stable = false;
    bool terminated = false;  // reached HALT/OUTPUT
    bool stuck = false;       // provably never terminates
    bool uncertain = false;
    std::uint64_t steps = 0;

    std::string to_string() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::halted: os << "Halted " << *value; break;
            case Kind::emitting: os << "Emitting " << emits << (stable ? " (stable)" : " (unstable)"); break;
            case Kind::out_of_budget: os << "OutOfBudget"; break;
            case Kind::oracle_exhausted: os << "OracleExhausted"; break;
        }
        return os.str();
    }
};

/// A run stable at budget T has no EMIT among its last ceil(T/2) steps.
inline bool emission_stable(std::uint64_t last_emit_step, std::uint64_t budget) {
    const std::uint64_t window = (budget + 1) / 2;
    return last_emit_step + window <= budget;
}

/// Runs at most `budget` steps. Throws ModeViolation.
inline RunOutcome run_code(const Code& code, const Mode& mode, std::vector<Nat> inputs, const Env& env,
                           std::uint64_t budget) {
    MachineState s;
    s.inputs = std::move(inputs);
    RunOutcome out;
    try {
        while (s.steps < budget && !s.halted && !s.stuck) {
            if (step(s, code, mode, env) == StepEvent::violation) {
                throw ModeViolation(std::string("instruction not allowed in ") + std::string(mode.name) +
                                    " mode at pc " + std::to_string(s.pc));
            }
        }
    } catch (const OracleExhausted&) {
        out.kind = RunOutcome::Kind::oracle_exhausted;
        out.steps = s.steps;
        out.emits = s.emits;
        return out;
    }
    if (s.stuck) s.steps = budget;
    out.steps = s.steps;
    out.emits = s.emits;
    out.terminated = s.halted;
    out.stuck = s.stuck;
    out.uncertain = s.uncertain;
    if (s.halted && mode.output) {
        out.kind = RunOutcome::Kind::halted;
        out.value = s.output;
    } else if (mode.emit) {
        out.kind = RunOutcome::Kind::emitting;
        out.stable = s.halted || s.stuck || emission_stable(s.last_emit_step, budget);
    } else {
        out.kind = RunOutcome::Kind::out_of_budget;
    }
    return out;
}

inline RunOutcome run(const Word& payload, const Mode& mode, std::vector<Nat> inputs, const Env& env,
                      std::uint64_t budget) {
    return run_code(decode(payload), mode, std::move(inputs), env, budget);
}

/// A payload seen as a partial function of its inputs, cut off at a budget.
class PartialFunction {
public:
    PartialFunction(const Word& payload, Env env, std::uint64_t budget, Mode mode = Mode::function())
        : code_(decode(payload)), env_(std::move(env)), budget_(budget), mode_(mode) {}

    std::optional<Nat> operator()(std::vector<Nat> inputs) const {
        auto out = run_code(code_, mode_, std::move(inputs), env_, budget_);
        if (out.kind == RunOutcome::Kind::halted) return out.value;
        return std::nullopt;
    }
    std::optional<Nat> operator()(const Nat& x) const { return (*this)(std::vector<Nat>{x}); }

private:
    Code code_;
    Env env_;
    std::uint64_t budget_;
    Mode mode_;
};

// ---------------------------------------------------------------------------
// Assembler

/// Builds code with symbolic jump targets.
class Assembler {
public:
    Assembler& halt() { return push(make_instruction(Op::halt)); }
    Assembler& inc(int r) { return push(reg_ins(Op::inc, r)); }
    Assembler& emit() { return push(make_instruction(Op::emit)); }
    Assembler& output(int r) { return push(reg_ins(Op::output, r)); }
    Assembler& callarg(int r) { return push(reg_ins(Op::callarg, r)); }
    Assembler& input(int slot, int r) {
        Instruction ins = reg_ins(Op::input, r);
        ins.slot = static_cast<std::uint8_t>(slot);
        return push(ins);
    }
    Assembler& loadc(int r, const Word& literal) {
        Instruction ins = reg_ins(Op::loadc, r);
        ins.literal = literal;
        return push(ins);
    }
    Assembler& loadc(int r, std::uint64_t value) { return loadc(r, nat_to_word(value)); }
    Assembler& decjz(int r, std::string label) { return jump(Op::decjz, r, std::move(label)); }
    Assembler& query(int r, std::string label) { return jump(Op::query, r, std::move(label)); }
    Assembler& decjz(int r, int offset) {
        Instruction ins = reg_ins(Op::decjz, r);
        ins.offset = offset;
        return push(ins);
    }
    Assembler& query(int r, int offset) {
        Instruction ins = reg_ins(Op::query, r);
        ins.offset = offset;
        return push(ins);
    }
    /// An invalid opcode: the canonical way to loop forever.
    Assembler& diverge() {
        Instruction ins = make_instruction(Op::invalid);
        ins.opcode = 15;
        return push(ins);
    }
    Assembler& label(std::string name) {
        labels_[std::move(name)] = code_.size();
        return *this;
    }

    Code code() const {
        Code out = code_;
        for (const auto& [index, name] : fixups_) {
            auto it = labels_.find(name);
            if (it == labels_.end()) throw std::invalid_argument("undefined label " + name);
            out[index].offset = static_cast<int>(it->second) - static_cast<int>(index);
        }
        return out;
    }
    Word assemble() const { return encode(code()); }

private:
    static Instruction reg_ins(Op op, int r) {
        if (r < 0 || r >= kRegisters) throw std::invalid_argument("register out of range");
        Instruction ins = make_instruction(op);
        ins.reg = static_cast<std::uint8_t>(r);
        return ins;
    }
    Assembler& push(Instruction ins) {
        code_.push_back(std::move(ins));
        return *this;
    }
    Assembler& jump(Op op, int r, std::string label) {
        fixups_.emplace_back(code_.size(), std::move(label));
        return push(reg_ins(op, r));
    }

    Code code_;
    std::map<std::string, std::size_t> labels_;
    std::vector<std::pair<std::size_t, std::string>> fixups_;
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

/// Text assembly: one instruction per line, `name:` defines a label, `;`
/// starts a comment. Registers are r0..r3, slots 0/1. Jump targets are labels
/// or signed integers. LOADC takes a decimal value or a `b'0101` literal.
inline Code parse_assembly(std::string_view text) {
    Assembler as;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("asm line " + std::to_string(lineno) + ": " + msg);
    };
    auto parse_reg = [&](const std::string& tok) {
        if (tok.size() != 2 || (tok[0] != 'r' && tok[0] != 'R') || tok[1] < '0' || tok[1] > '3') {
            fail("bad register '" + tok + "'");
        }
        return tok[1] - '0';
    };
    auto is_int = [](const std::string& tok) {
        if (tok.empty()) return false;
        std::size_t i = (tok[0] == '-' || tok[0] == '+') ? 1 : 0;
        if (i == tok.size()) return false;
        for (; i < tok.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
        }
        return true;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
        std::string body = trim(line);
        if (body.empty()) continue;
        if (body.back() == ':') {
            as.label(trim(std::string_view(body).substr(0, body.size() - 1)));
            continue;
        }
        for (char& ch : body) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream ts(body);
        std::string mnemonic;
        ts >> mnemonic;
        for (char& ch : mnemonic) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        std::vector<std::string> args;
        for (std::string tok; ts >> tok;) args.push_back(tok);
        auto want = [&](std::size_t n) {
            if (args.size() != n) fail(mnemonic + " takes " + std::to_string(n) + " operands");
        };
        if (mnemonic == "HALT") { want(0); as.halt(); }
        else if (mnemonic == "EMIT") { want(0); as.emit(); }
        else if (mnemonic == "DIVERGE") { want(0); as.diverge(); }
        else if (mnemonic == "INC") { want(1); as.inc(parse_reg(args[0])); }
        else if (mnemonic == "OUTPUT") { want(1); as.output(parse_reg(args[0])); }
        else if (mnemonic == "CALLARG") { want(1); as.callarg(parse_reg(args[0])); }
        else if (mnemonic == "INPUT") {
            want(2);
            if (args[0] != "0" && args[0] != "1") fail("input slot must be 0 or 1");
            as.input(args[0][0] - '0', parse_reg(args[1]));
        } else if (mnemonic == "DECJZ" || mnemonic == "QUERY") {
            want(2);
            const int r = parse_reg(args[0]);
            if (is_int(args[1])) {
                mnemonic == "DECJZ" ? as.decjz(r, std::stoi(args[1])) : as.query(r, std::stoi(args[1]));
            } else {
                mnemonic == "DECJZ" ? as.decjz(r, args[1]) : as.query(r, args[1]);
            }
        } else if (mnemonic == "LOADC") {
            want(2);
            const int r = parse_reg(args[0]);
            if (args[1].rfind("b'", 0) == 0) {
                as.loadc(r, Word(args[1].substr(2)));
            } else if (is_int(args[1]) && args[1][0] != '-') {
                as.loadc(r, static_cast<std::uint64_t>(std::stoull(args[1])));
            } else {
                fail("bad LOADC literal '" + args[1] + "'");
            }
        } else {
            fail("unknown mnemonic '" + mnemonic + "'");
        }
    }
    return as.code();
}

inline Word assemble(std::string_view text) { return encode(parse_assembly(text)); }

inline std::string disassemble(const Code& code) {
    std::ostringstream os;
    for (std::size_t i = 0; i < code.size(); ++i) {
        const auto& ins = code[i];
        os << i << ": ";
        switch (ins.op) {
            case Op::halt: os << "HALT"; break;
            case Op::inc: os << "INC r" << int(ins.reg); break;
            case Op::decjz: os << "DECJZ r" << int(ins.reg) << ", " << ins.offset; break;
            case Op::emit: os << "EMIT"; break;
            case Op::input: os << "INPUT " << int(ins.slot) << ", r" << int(ins.reg); break;
            case Op::output: os << "OUTPUT r" << int(ins.reg); break;
            case Op::query: os << "QUERY r" << int(ins.reg) << ", " << ins.offset; break;
            case Op::callarg: os << "CALLARG r" << int(ins.reg); break;
            case Op::loadc: os << "LOADC r" << int(ins.reg) << ", b'" << ins.literal; break;
            case Op::invalid: os << "DIVERGE ; opcode " << int(ins.opcode); break;
            case Op::partial: os << "<partial>"; break;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace reprk::rm
