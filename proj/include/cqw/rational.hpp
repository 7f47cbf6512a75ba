#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace cqw {

struct ArithmeticError : std::domain_error {
    using std::domain_error::domain_error;
};

// Exact rational number. Values whose numerator and denominator fit in
// int64 are kept inline; anything larger lives in a GMP mpq.
class Rat {
public:
    Rat() = default;
    Rat(long long v) : n_(v) {}  // NOLINT(implicit)
    Rat(int v) : n_(v) {}        // NOLINT(implicit)
    Rat(long long num, long long den);
    explicit Rat(const mpq_class& q) { assign(q); }

    Rat(const Rat& o) : n_(o.n_), d_(o.d_) {
        if (o.big_) big_ = std::make_unique<mpq_class>(*o.big_);
    }
    Rat(Rat&&) noexcept = default;
    Rat& operator=(const Rat& o) {
        if (this != &o) {
            n_ = o.n_;
            d_ = o.d_;
            big_ = o.big_ ? std::make_unique<mpq_class>(*o.big_) : nullptr;
        }
        return *this;
    }
    Rat& operator=(Rat&&) noexcept = default;

    // "p/q", "p", or "-p/q"; whitespace not allowed.
    static Rat parse(std::string_view s);

    bool is_small() const { return !big_; }
    int sign() const;
    bool is_zero() const { return !big_ && n_ == 0; }
    bool is_integer() const;
    mpq_class to_mpq() const;
    mpz_class num() const;
    mpz_class den() const;
    double to_double() const;
    std::string str() const;

    Rat operator-() const;
    Rat abs() const { return sign() < 0 ? -*this : *this; }
    Rat inverse() const;

    friend Rat operator+(const Rat& a, const Rat& b);
    friend Rat operator-(const Rat& a, const Rat& b);
    friend Rat operator*(const Rat& a, const Rat& b);
    friend Rat operator/(const Rat& a, const Rat& b);
    Rat& operator+=(const Rat& b) { return *this = *this + b; }
    Rat& operator-=(const Rat& b) { return *this = *this - b; }
    Rat& operator*=(const Rat& b) { return *this = *this * b; }
    Rat& operator/=(const Rat& b) { return *this = *this / b; }

    friend int cmp(const Rat& a, const Rat& b);
    friend bool operator==(const Rat& a, const Rat& b) { return cmp(a, b) == 0; }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        int c = cmp(a, b);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    std::size_t hash() const;

private:
    void assign(const mpq_class& q);  // demotes to inline form when it fits
    static Rat from_i128(__int128 n, __int128 d);

    long long n_ = 0;
    long long d_ = 1;
    std::unique_ptr<mpq_class> big_;
};

inline const Rat& min(const Rat& a, const Rat& b) { return cmp(b, a) < 0 ? b : a; }
inline const Rat& max(const Rat& a, const Rat& b) { return cmp(b, a) > 0 ? b : a; }

// Least common multiple of denominators / gcd helpers for integralization.
mpz_class lcm_den(const mpz_class& acc, const Rat& r);

std::ostream& operator<<(std::ostream& os, const Rat& r);

}  // namespace cqw

template <>
struct std::hash<cqw::Rat> {
    std::size_t operator()(const cqw::Rat& r) const noexcept { return r.hash(); }
};
