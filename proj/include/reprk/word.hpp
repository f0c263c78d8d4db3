#pragma once

// Binary words, the escape-coded pairing <e,p> and the length-lex
// bijection between words and naturals.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace reprk {

using Nat = boost::multiprecision::cpp_int;
using Int = boost::multiprecision::cpp_int;

class MalformedWord : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A finite binary string. Stored as ASCII '0'/'1' so the text form is the
/// in-memory form.
class Word {
public:
    Word() = default;

    /// Throws MalformedWord on any character other than '0' or '1'.
    explicit Word(std::string_view bits) : bits_(bits) {
        for (char c : bits_) {
            if (c != '0' && c != '1') {
                throw MalformedWord("word contains a non-binary character");
            }
        }
    }

    static Word zeros(std::size_t n) { return Word(std::string(n, '0'), trusted{}); }

    std::size_t size() const noexcept { return bits_.size(); }
    bool empty() const noexcept { return bits_.empty(); }
    bool operator[](std::size_t i) const noexcept { return bits_[i] == '1'; }

    void push_back(bool b) { bits_.push_back(b ? '1' : '0'); }
    void append(const Word& w) { bits_ += w.bits_; }

    Word substr(std::size_t pos, std::size_t len = std::string::npos) const {
        return Word(bits_.substr(pos, len), trusted{});
    }

    const std::string& str() const noexcept { return bits_; }

    friend Word operator+(Word a, const Word& b) {
        a.append(b);
        return a;
    }

    friend bool operator==(const Word&, const Word&) = default;

    /// Length-lex order: shorter words first, then lexicographic.
    friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
        if (auto c = a.size() <=> b.size(); c != 0) return c;
        return a.bits_.compare(b.bits_) <=> 0;
    }

    friend std::ostream& operator<<(std::ostream& os, const Word& w) { return os << w.bits_; }

private:
    struct trusted {};
    Word(std::string bits, trusted) : bits_(std::move(bits)) {}

    std::string bits_;
};

struct Pair {
    Word header;
    Word payload;

    friend bool operator==(const Pair&, const Pair&) = default;
};

/// <e,p> = 0e1 0e2 ... 0en 1 p, of length |p| + 2|e| + 1.
inline Word couple_encode(const Word& e, const Word& p) {
    std::string out;
    out.reserve(p.size() + 2 * e.size() + 1);
    for (std::size_t i = 0; i < e.size(); ++i) {
        out.push_back('0');
        out.push_back(e[i] ? '1' : '0');
    }
    out.push_back('1');
    out += p.str();
    return Word(out);
}

/// Inverse of couple_encode. Throws MalformedWord when no terminating '1'
/// appears at an even position.
inline Pair couple_decode(const Word& w) {
    Word header;
    std::size_t i = 0;
    while (i < w.size()) {
        if (w[i]) {
            return Pair{std::move(header), w.substr(i + 1)};
        }
        if (i + 1 >= w.size()) break;
        header.push_back(w[i + 1]);
        i += 2;
    }
    throw MalformedWord("pairing has no terminator: '" + w.str() + "'");
}

/// Non-throwing decode for hot paths.
inline bool try_couple_decode(const Word& w, Pair& out) {
    out.header = Word();
    std::size_t i = 0;
    while (i < w.size()) {
        if (w[i]) {
            out.payload = w.substr(i + 1);
            return true;
        }
        if (i + 1 >= w.size()) return false;
        out.header.push_back(w[i + 1]);
        i += 2;
    }
    return false;
}

/// Length-lex rank: eps -> 0, "0" -> 1, "1" -> 2, "00" -> 3, ...
/// Equivalently, the binary value of "1"w minus one.
inline Nat word_to_nat(const Word& w) {
    Nat n = 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
        n <<= 1;
        if (w[i]) n |= 1;
    }
    return n - 1;
}

inline Word nat_to_word(const Nat& n) {
    Nat m = n + 1;
    const std::size_t bits = boost::multiprecision::msb(m);
    std::string out(bits, '0');
    for (std::size_t i = 0; i < bits; ++i) {
        if (boost::multiprecision::bit_test(m, bits - 1 - i)) out[i] = '1';
    }
    return Word(out);
}

/// Word with the given length-lex rank, for ranks that fit in 64 bits.
inline Word nat_to_word(std::uint64_t n) { return nat_to_word(Nat(n)); }

/// Calls f on every word of length <= max_len in length-lex order.
template <class F>
void for_each_word(std::size_t max_len, F&& f) {
    for (std::size_t len = 0; len <= max_len; ++len) {
        const std::uint64_t count = std::uint64_t{1} << len;
        std::string bits(len, '0');
        for (std::uint64_t v = 0; v < count; ++v) {
            for (std::size_t i = 0; i < len; ++i) {
                bits[len - 1 - i] = ((v >> i) & 1) ? '1' : '0';
            }
            f(Word(bits));
        }
    }
}

}  // namespace reprk

template <>
struct std::hash<reprk::Word> {
    std::size_t operator()(const reprk::Word& w) const noexcept {
        return std::hash<std::string>{}(w.str());
    }
};
