#pragma once

// Positional numeral systems as digit-map algebras (unary, k-ary, k-adic,
// Avizienis signed digit) and the additive representations by four squares
// and by at most seven primes.

#include "reprk/word.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reprk::numerals {

class NumeralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DigitOutOfRange : public NumeralError {
public:
    using NumeralError::NumeralError;
};
class NegativeNotRepresentable : public NumeralError {
public:
    using NumeralError::NumeralError;
};
class RelationMismatch : public NumeralError {
public:
    using NumeralError::NumeralError;
};
class NotRepresentable : public NumeralError {
public:
    using NumeralError::NumeralError;
};

enum class Kind { unary, k_ary, k_adic, avizienis };

/// A base k together with its digit set. Each digit d acts as S_d : x -> kx + d.
class PositionalSystem {
public:
    static PositionalSystem unary() { return PositionalSystem(Kind::unary, 1); }
    static PositionalSystem k_ary(int k) { return PositionalSystem(Kind::k_ary, k); }
    static PositionalSystem k_adic(int k) { return PositionalSystem(Kind::k_adic, k); }
    static PositionalSystem avizienis(int k) { return PositionalSystem(Kind::avizienis, k); }

    Kind kind() const noexcept { return kind_; }
    int base() const noexcept { return k_; }

    int min_digit() const noexcept {
        switch (kind_) {
            case Kind::unary: return 1;
            case Kind::k_ary: return 0;
            case Kind::k_adic: return 1;
            case Kind::avizienis: return -k_ + 1;
        }
        return 0;
    }
    int max_digit() const noexcept {
        switch (kind_) {
            case Kind::unary: return 1;
            case Kind::k_ary: return k_ - 1;
            case Kind::k_adic: return k_;
            case Kind::avizienis: return k_ - 1;
        }
        return 0;
    }
    bool has_digit(int d) const noexcept { return d >= min_digit() && d <= max_digit(); }
    bool redundant() const noexcept { return kind_ == Kind::avizienis; }

private:
    PositionalSystem(Kind kind, int k) : kind_(kind), k_(k) {
        if (kind != Kind::unary && k < 2) {
            throw NumeralError("base must be at least 2");
        }
    }

    Kind kind_;
    int k_;
};

/// Digits d_n ... d_0, most significant first.
using DigitString = std::vector<int>;

inline Int digits_to_value(const PositionalSystem& sys, const DigitString& ds) {
    Int v = 0;
    for (int d : ds) {
        if (!sys.has_digit(d)) {
            throw DigitOutOfRange("digit " + std::to_string(d) + " outside the digit set");
        }
        v = v * sys.base() + d;
    }
    return v;
}

inline DigitString value_to_digits(const PositionalSystem& sys, const Int& n) {
    const int k = sys.base();
    DigitString out;
    if (n < 0 && !sys.redundant()) {
        throw NegativeNotRepresentable("negative value in a nonnegative system");
    }
    switch (sys.kind()) {
        case Kind::unary: {
            if (n > 1'000'000) throw NumeralError("unary string too long");
            out.assign(static_cast<std::size_t>(n), 1);
            return out;
        }
        case Kind::k_ary: {
            if (n == 0) return DigitString{0};
            Int q = n;
            while (q > 0) {
                out.push_back(static_cast<int>(q % k));
                q /= k;
            }
            break;
        }
        case Kind::k_adic: {
            Int q = n;
            while (q > 0) {
                const int d = static_cast<int>((q - 1) % k) + 1;
                out.push_back(d);
                q = (q - d) / k;
            }
            break;
        }
        case Kind::avizienis: {
            if (n == 0) return DigitString{0};
            Int q = n;
            while (q != 0) {
                int r = static_cast<int>(((q % k) + k) % k);
                // balanced digit in (-k/2, k/2]; an exact half takes the sign of q
                if (2 * r > k || (2 * r == k && q < 0)) r -= k;
                out.push_back(r);
                q = (q - r) / k;
            }
            break;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

/// One application of S_{-k+i} o S_{j+1} = S_i o S_j at a digit position.
/// `position` indexes the less significant digit of the rewritten pair,
/// counting from the least significant end.
struct AvizienisRewrite {
    std::size_t position;
    int j;
    int i;
};

/// Rewrites in whichever direction matches. With no rewrite the string is
/// returned unchanged.
inline DigitString avizienis_rewrite(const PositionalSystem& sys, DigitString ds,
                                     const std::optional<AvizienisRewrite>& rw) {
    if (sys.kind() != Kind::avizienis) {
        throw RelationMismatch("rewrite relations only exist for Avizienis systems");
    }
    if (!rw) return ds;
    const int k = sys.base();
    const auto [pos, j, i] = *rw;
    if (!(-k < j && j < k - 1) || !(0 < i && i < k)) {
        throw RelationMismatch("relation parameters out of range");
    }
    if (pos + 1 >= ds.size()) {
        throw RelationMismatch("rewrite position past the most significant digit");
    }
    const std::size_t lo = ds.size() - 1 - pos;
    const std::size_t hi = lo - 1;
    if (ds[hi] == j + 1 && ds[lo] == -k + i) {
        ds[hi] = j;
        ds[lo] = i;
    } else if (ds[hi] == j && ds[lo] == i) {
        ds[hi] = j + 1;
        ds[lo] = -k + i;
    } else {
        throw RelationMismatch("digits do not match either side of the relation");
    }
    return ds;
}

inline std::string format_digits(const PositionalSystem& sys, const DigitString& ds) {
    std::string out;
    if (sys.kind() == Kind::avizienis || sys.base() > 10) {
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(ds[i]);
        }
        return out;
    }
    // k-adic base 10 uses the digit 10; spell it 'A' like a hex digit.
    for (int d : ds) out += d < 10 ? static_cast<char>('0' + d) : 'A';
    return out;
}

/// Accepts either a comma-separated list ("2,-1") or a compact digit run
/// ("101", with 'A' standing for ten).
inline DigitString parse_digits(std::string_view text) {
    DigitString ds;
    if (text.find(',') != std::string_view::npos || text.find('-') != std::string_view::npos) {
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t end = std::min(text.find(',', start), text.size());
            const std::string tok(text.substr(start, end - start));
            try {
                std::size_t used = 0;
                ds.push_back(std::stoi(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw NumeralError("bad digit '" + tok + "'");
            }
            start = end + 1;
        }
        return ds;
    }
    for (char c : text) {
        if (c >= '0' && c <= '9') {
            ds.push_back(c - '0');
        } else if (c == 'A' || c == 'a') {
            ds.push_back(10);
        } else {
            throw NumeralError(std::string("bad digit '") + c + "'");
        }
    }
    return ds;
}

struct FourSquares {
    std::int64_t x, y, z, t;
    friend bool operator==(const FourSquares&, const FourSquares&) = default;
};

inline std::int64_t isqrt(std::int64_t n) {
    if (n <= 0) return 0;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

/// Lexicographically least (x,y,z,t) with x >= y >= z >= t and sum of squares n.
inline FourSquares four_squares(std::int64_t n) {
    if (n < 0) throw NegativeNotRepresentable("four squares needs n >= 0");
    for (std::int64_t x = 0; x * x <= n; ++x) {
        if (4 * x * x < n) continue;
        for (std::int64_t y = 0; y <= x && x * x + y * y <= n; ++y) {
            const std::int64_t r2 = n - x * x - y * y;
            if (3 * y * y < r2) continue;
            for (std::int64_t z = 0; z <= y && z * z <= r2; ++z) {
                const std::int64_t r1 = r2 - z * z;
                if (2 * z * z < r1) continue;
                const std::int64_t t = isqrt(r1);
                if (t * t == r1 && t <= z) return {x, y, z, t};
            }
        }
    }
    throw NotRepresentable("no four-square decomposition found");  // unreachable by Lagrange
}

/// Sieve of Eratosthenes, grown on demand.
class PrimeTable {
public:
    explicit PrimeTable(std::int64_t limit = 2) { grow(limit); }

    void grow(std::int64_t limit) {
        if (limit < static_cast<std::int64_t>(sieve_.size())) return;
        const std::int64_t n = std::max<std::int64_t>(limit + 1, 2 * static_cast<std::int64_t>(sieve_.size()));
        sieve_.assign(static_cast<std::size_t>(n), true);
        sieve_[0] = false;
        if (n > 1) sieve_[1] = false;
        for (std::int64_t p = 2; p * p < n; ++p) {
            if (!sieve_[p]) continue;
            for (std::int64_t m = p * p; m < n; m += p) sieve_[m] = false;
        }
    }

    bool is_prime(std::int64_t n) {
        if (n < 2) return false;
        grow(n);
        return sieve_[n];
    }

    /// Largest prime <= n, or 0 if none.
    std::int64_t prime_at_most(std::int64_t n) {
        grow(n);
        for (std::int64_t p = n; p >= 2; --p) {
            if (sieve_[p]) return p;
        }
        return 0;
    }

private:
    std::vector<bool> sieve_;
};

namespace detail {
inline bool prime_sum_search(PrimeTable& primes, std::int64_t rest, std::int64_t cap, int depth,
                             std::vector<std::int64_t>& acc) {
    if (rest == 0) return true;
    if (depth == 0 || rest < 2) return false;
    for (std::int64_t p = primes.prime_at_most(std::min(rest, cap)); p >= 2;
         p = primes.prime_at_most(p - 1)) {
        // depth summands of at most p cannot reach rest
        if (p * depth < rest) return false;
        acc.push_back(p);
        if (prime_sum_search(primes, rest - p, p, depth - 1, acc)) return true;
        acc.pop_back();
    }
    return false;
}
}  // namespace detail

/// Non-increasing list of at most 7 primes summing to n: greedy largest-first
/// with backtracking. Throws NotRepresentable for n < 2.
inline std::vector<std::int64_t> prime_sum(std::int64_t n, PrimeTable& primes) {
    if (n < 2) throw NotRepresentable("prime sums need n >= 2");
    std::vector<std::int64_t> acc;
    if (!detail::prime_sum_search(primes, n, n, 7, acc)) {
        throw NotRepresentable("no sum of at most 7 primes found for " + std::to_string(n));
    }
    return acc;
}

inline std::vector<std::int64_t> prime_sum(std::int64_t n) {
    PrimeTable primes(n);
    return prime_sum(n, primes);
}

}  // namespace reprk::numerals
