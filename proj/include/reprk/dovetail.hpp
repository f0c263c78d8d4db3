#pragma once

// Fair interleaving of countably many step-counted computations, and the
// sources that answer halting questions on behalf of the jump oracle.

#include "reprk/rm.hpp"
#include "reprk/word.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace reprk {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

/// What is known about a task after it has received some number of steps.
struct TaskStatus {
    enum class Kind { running, halted, diverged };
    Kind kind = Kind::running;
    Nat value;  // defined when halted
};

/// A computation that can be advanced a step at a time.
///
/// `next_wake` reports the smallest local step count at which the status can
/// change; a dovetailer need not deliver intermediate steps one by one. A
/// task that returns kNever stays running forever as far as anyone can tell
/// within its horizon.
class Task {
public:
    virtual ~Task() = default;
    virtual std::uint64_t next_wake() const = 0;
    /// Delivers steps up to `local` (which must equal next_wake()).
    virtual TaskStatus run_until(std::uint64_t local) = 0;
};

/// A task whose fate is known in advance.
class FixedTask final : public Task {
public:
    static std::unique_ptr<Task> halts_at(std::uint64_t step, Nat value) {
        return std::unique_ptr<Task>(new FixedTask(step, TaskStatus::Kind::halted, std::move(value)));
    }
    static std::unique_ptr<Task> diverges_at(std::uint64_t step) {
        return std::unique_ptr<Task>(new FixedTask(step, TaskStatus::Kind::diverged, 0));
    }
    static std::unique_ptr<Task> unknown() {
        return std::unique_ptr<Task>(new FixedTask(kNever, TaskStatus::Kind::running, 0));
    }

    std::uint64_t next_wake() const override { return wake_; }
    TaskStatus run_until(std::uint64_t) override { return TaskStatus{kind_, value_}; }

private:
    FixedTask(std::uint64_t wake, TaskStatus::Kind kind, Nat value)
        : wake_(wake), kind_(kind), value_(std::move(value)) {}
    std::uint64_t wake_;
    TaskStatus::Kind kind_;
    Nat value_;
};

struct Discovery {
    std::uint64_t task;
    std::uint64_t local_step;
    std::uint64_t round;
    Nat value;

    friend bool operator==(const Discovery&, const Discovery&) = default;
};

/// Triangular schedule. Round r (1-based) starts task r-1 and gives one step
/// to each of tasks 0..r-1, in index order. Task i therefore receives its
/// j-th step in round i+j.
class DovetailRun {
public:
    /// The generator receives the task index and the most local steps that
    /// task can receive before the horizon.
    using Generator = std::function<std::unique_ptr<Task>(std::uint64_t index, std::uint64_t cap)>;

    DovetailRun(Generator gen, std::uint64_t horizon) : gen_(std::move(gen)), horizon_(horizon) {}

    std::uint64_t rounds() const noexcept { return rounds_; }
    std::uint64_t horizon() const noexcept { return horizon_; }
    std::uint64_t started() const noexcept { return rounds_; }

    /// Steps task k has received so far.
    std::uint64_t steps_received(std::uint64_t k) const noexcept { return rounds_ > k ? rounds_ - k : 0; }

    const std::vector<Discovery>& log() const noexcept { return log_; }

    bool resolved(std::uint64_t k) const { return halted_.count(k) || diverged_.count(k); }
    bool halted(std::uint64_t k) const { return halted_.count(k) != 0; }
    const std::unordered_map<std::uint64_t, Nat>& halted_values() const noexcept { return halted_; }

    /// Advance until `s` rounds have run in total (capped at the horizon).
    void run_to(std::uint64_t s) {
        s = std::min(s, horizon_);
        while (rounds_ < s) round();
    }

    /// One round. Returns the number of discoveries it made.
    std::size_t round() {
        if (rounds_ >= horizon_) return 0;
        const std::uint64_t r = ++rounds_;
        const std::uint64_t fresh = r - 1;
        auto task = gen_(fresh, horizon_ - fresh);
        schedule(fresh, std::move(task));
        const std::size_t before = log_.size();
        while (!due_.empty() && due_.top().first == r) {
            const std::uint64_t i = due_.top().second;
            due_.pop();
            auto it = tasks_.find(i);
            const std::uint64_t local = r - i;
            const TaskStatus st = it->second->run_until(local);
            if (st.kind == TaskStatus::Kind::halted) {
                log_.push_back(Discovery{i, local, r, st.value});
                halted_.emplace(i, st.value);
                tasks_.erase(it);
            } else if (st.kind == TaskStatus::Kind::diverged) {
                diverged_.insert(i);
                tasks_.erase(it);
            } else {
                const std::uint64_t w = std::max(it->second->next_wake(), local + 1);
                if (w == kNever || i + w > horizon_) {
                    tasks_.erase(it);
                } else {
                    due_.emplace(i + w, i);
                }
            }
        }
        return log_.size() - before;
    }

private:
    void schedule(std::uint64_t i, std::unique_ptr<Task> task) {
        // A task is first looked at once it has had one step.
        const std::uint64_t w = std::max<std::uint64_t>(task->next_wake(), 1);
        if (w == kNever || i + w > horizon_) return;
        due_.emplace(i + w, i);
        tasks_.emplace(i, std::move(task));
    }

    using Due = std::pair<std::uint64_t, std::uint64_t>;  // (round, index)
    Generator gen_;
    std::uint64_t horizon_;
    std::uint64_t rounds_ = 0;
    std::priority_queue<Due, std::vector<Due>, std::greater<>> due_;
    std::unordered_map<std::uint64_t, std::unique_ptr<Task>> tasks_;
    std::unordered_map<std::uint64_t, Nat> halted_;
    std::unordered_set<std::uint64_t> diverged_;
    std::vector<Discovery> log_;
};

/// Convenience: discovery log of `s` rounds.
inline std::vector<Discovery> dovetail(DovetailRun::Generator gen, std::uint64_t s) {
    DovetailRun run(std::move(gen), s);
    run.run_to(s);
    return run.log();
}

// ---------------------------------------------------------------------------
// Halting questions

/// Outcome of searching for a halt within a step cap.
struct SearchResult {
    std::optional<std::uint64_t> halt_step;
    bool proven_divergent = false;
};

/// A Sigma_1 statement, phrased as "this search halts".
class Query {
public:
    virtual ~Query() = default;
    virtual SearchResult search(std::uint64_t cap) const = 0;
    /// The queried program, when the question is literally "does w halt".
    virtual std::optional<Word> program() const { return std::nullopt; }
    virtual std::string describe() const = 0;
};

using QueryPtr = std::shared_ptr<const Query>;

/// Answers queries for a machine. Implemented by oracle sources and by
/// emulations that intercept queries.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual OracleReply ask(const QueryPtr& q) = 0;
};

/// Programs known never to halt, with a one-line justification each, plus
/// declared domain bounds for function fixtures.
class Registry {
public:
    void add_divergent(const Word& w, std::string why) { divergent_.emplace(w, std::move(why)); }
    bool is_divergent(const Word& w) const { return divergent_.count(w) != 0; }
    const std::unordered_map<Word, std::string>& divergent() const noexcept { return divergent_; }

    /// Every input at or above `bound` (in each coordinate) is undefined.
    void declare_domain_bound(const Word& w, std::uint64_t bound) { bounds_[w] = bound; }
    std::optional<std::uint64_t> domain_bound(const Word& w) const {
        auto it = bounds_.find(w);
        if (it == bounds_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::unordered_map<Word, std::string> divergent_;
    std::unordered_map<Word, std::uint64_t> bounds_;
};

struct QueryRecord {
    std::string query;
    Answer answer;
    bool certain;
};

class OracleSource final : public Oracle {
public:
    enum class Kind { scripted, budgeted_truth, registry_augmented };

    static OracleSource scripted(std::vector<Answer> answers) {
        OracleSource s(Kind::scripted, 0, nullptr);
        s.script_.assign(answers.begin(), answers.end());
        return s;
    }
    static OracleSource budgeted_truth(std::uint64_t budget) {
        return OracleSource(Kind::budgeted_truth, budget, nullptr);
    }
    static OracleSource registry_augmented(std::uint64_t budget, std::shared_ptr<const Registry> registry) {
        return OracleSource(Kind::registry_augmented, budget, std::move(registry));
    }

    Kind kind() const noexcept { return kind_; }
    std::uint64_t budget() const noexcept { return budget_; }
    const std::vector<QueryRecord>& history() const noexcept { return history_; }

    /// YES is certain: a halt was seen. NO is certain only when the program is
    /// registered divergent or the search proved it loops.
    OracleReply ask(const QueryPtr& q) override {
        OracleReply reply{Answer::no, false};
        if (kind_ == Kind::scripted) {
            if (script_.empty()) throw OracleExhausted("scripted oracle has no answers left");
            reply = OracleReply{script_.front(), true};
            script_.pop_front();
        } else {
            const auto prog = q->program();
            if (kind_ == Kind::registry_augmented && prog && registry_ && registry_->is_divergent(*prog)) {
                reply = OracleReply{Answer::no, true};
            } else {
                const SearchResult r = q->search(budget_);
                if (r.halt_step) {
                    reply = OracleReply{Answer::yes, true};
                } else {
                    reply = OracleReply{Answer::no, r.proven_divergent};
                }
            }
        }
        history_.push_back(QueryRecord{q->describe(), reply.answer, reply.certain});
        return reply;
    }

private:
    OracleSource(Kind kind, std::uint64_t budget, std::shared_ptr<const Registry> registry)
        : kind_(kind), budget_(budget), registry_(std::move(registry)) {}

    Kind kind_;
    std::uint64_t budget_;
    std::shared_ptr<const Registry> registry_;
    std::deque<Answer> script_;
    std::vector<QueryRecord> history_;
};

}  // namespace reprk
