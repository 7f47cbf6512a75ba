#include "cqw/rational.hpp"

#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>

namespace cqw {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr long long kMin = std::numeric_limits<long long>::min();
constexpr long long kMax = std::numeric_limits<long long>::max();

bool fits(i128 v) { return v > kMin && v <= kMax; }  // exclude INT64_MIN so negation is safe

u128 gcd128(u128 a, u128 b) {
    while (b) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

u128 uabs(i128 v) { return v < 0 ? static_cast<u128>(-v) : static_cast<u128>(v); }

mpz_class to_mpz(i128 v) {
    bool neg = v < 0;
    u128 u = uabs(v);
    mpz_class hi(static_cast<unsigned long>(u >> 64));
    mpz_class lo(static_cast<unsigned long>(u & 0xffffffffffffffffULL));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
}

}  // namespace

Rat::Rat(long long num, long long den) {
    if (den == 0) throw ArithmeticError("zero denominator");
    *this = from_i128(num, den);
}

Rat Rat::from_i128(i128 n, i128 d) {
    if (d == 0) throw ArithmeticError("division by zero");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    u128 g = gcd128(uabs(n), static_cast<u128>(d));
    if (g > 1) {
        n /= static_cast<i128>(g);
        d /= static_cast<i128>(g);
    }
    Rat r;
    if (fits(n) && fits(d)) {
        r.n_ = static_cast<long long>(n);
        r.d_ = static_cast<long long>(d);
    } else {
        r.big_ = std::make_unique<mpq_class>(to_mpz(n), to_mpz(d));
    }
    return r;
}

void Rat::assign(const mpq_class& q) {
    const mpz_class& nu = q.get_num();
    const mpz_class& de = q.get_den();
    if (nu.fits_slong_p() && de.fits_slong_p() && nu.get_si() != kMin) {
        n_ = nu.get_si();
        d_ = de.get_si();
        big_.reset();
    } else {
        big_ = std::make_unique<mpq_class>(q);
        n_ = 0;
        d_ = 1;
    }
}

Rat Rat::parse(std::string_view s) {
    auto slash = s.find('/');
    std::string ns(s.substr(0, slash));
    std::string ds = slash == std::string_view::npos ? "1" : std::string(s.substr(slash + 1));
    auto valid = [](const std::string& t, bool allow_sign) {
        if (t.empty()) return false;
        std::size_t i = 0;
        if (allow_sign && (t[0] == '-' || t[0] == '+')) i = 1;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') return false;
        return true;
    };
    if (!valid(ns, true) || !valid(ds, false)) throw std::invalid_argument("bad rational: " + std::string(s));
    if (ns[0] == '+') ns.erase(0, 1);
    mpz_class nu(ns), de(ds);
    if (de == 0) throw ArithmeticError("zero denominator");
    mpq_class q(nu, de);
    q.canonicalize();
    return Rat(q);
}

int Rat::sign() const {
    if (big_) return sgn(*big_);
    return (n_ > 0) - (n_ < 0);
}

bool Rat::is_integer() const { return big_ ? big_->get_den() == 1 : d_ == 1; }

mpq_class Rat::to_mpq() const {
    if (big_) return *big_;
    return mpq_class(mpz_class(static_cast<long>(n_)), mpz_class(static_cast<long>(d_)));
}

mpz_class Rat::num() const { return big_ ? mpz_class(big_->get_num()) : mpz_class(static_cast<long>(n_)); }
mpz_class Rat::den() const { return big_ ? mpz_class(big_->get_den()) : mpz_class(static_cast<long>(d_)); }

double Rat::to_double() const { return big_ ? big_->get_d() : static_cast<double>(n_) / static_cast<double>(d_); }

std::string Rat::str() const {
    if (big_) return big_->get_str();
    if (d_ == 1) return std::to_string(n_);
    return std::to_string(n_) + "/" + std::to_string(d_);
}

Rat Rat::operator-() const {
    if (big_) return Rat(mpq_class(-*big_));
    Rat r;
    r.n_ = -n_;
    r.d_ = d_;
    return r;
}

Rat Rat::inverse() const {
    if (is_zero()) throw ArithmeticError("division by zero");
    if (big_) return Rat(mpq_class(1 / *big_));
    return from_i128(d_, n_);
}

Rat operator+(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
        if (a.d_ == 1 && b.d_ == 1) {
            long long s;
            if (!__builtin_add_overflow(a.n_, b.n_, &s) && s != kMin) return Rat(s);
        }
        i128 n = static_cast<i128>(a.n_) * b.d_ + static_cast<i128>(b.n_) * a.d_;
        i128 d = static_cast<i128>(a.d_) * b.d_;
        return Rat::from_i128(n, d);
    }
    return Rat(mpq_class(a.to_mpq() + b.to_mpq()));
}

Rat operator-(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
        if (a.d_ == 1 && b.d_ == 1) {
            long long s;
            if (!__builtin_sub_overflow(a.n_, b.n_, &s) && s != kMin) return Rat(s);
        }
        i128 n = static_cast<i128>(a.n_) * b.d_ - static_cast<i128>(b.n_) * a.d_;
        i128 d = static_cast<i128>(a.d_) * b.d_;
        return Rat::from_i128(n, d);
    }
    return Rat(mpq_class(a.to_mpq() - b.to_mpq()));
}

Rat operator*(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
        if (a.n_ == 0 || b.n_ == 0) return Rat();
        long long g1 = std::gcd(a.n_, b.d_), g2 = std::gcd(b.n_, a.d_);
        i128 n = static_cast<i128>(a.n_ / g1) * (b.n_ / g2);
        i128 d = static_cast<i128>(a.d_ / g2) * (b.d_ / g1);
        if (fits(n) && fits(d)) {
            Rat r;
            r.n_ = static_cast<long long>(n);
            r.d_ = static_cast<long long>(d);
            return r;
        }
        return Rat::from_i128(n, d);
    }
    return Rat(mpq_class(a.to_mpq() * b.to_mpq()));
}

Rat operator/(const Rat& a, const Rat& b) {
    if (b.is_zero()) throw ArithmeticError("division by zero");
    if (!a.big_ && !b.big_) {
        i128 n = static_cast<i128>(a.n_) * b.d_;
        i128 d = static_cast<i128>(a.d_) * b.n_;
        return Rat::from_i128(n, d);
    }
    return Rat(mpq_class(a.to_mpq() / b.to_mpq()));
}

int cmp(const Rat& a, const Rat& b) {
    if (!a.big_ && !b.big_) {
        if (a.d_ == b.d_) return (a.n_ > b.n_) - (a.n_ < b.n_);
        i128 l = static_cast<i128>(a.n_) * b.d_;
        i128 r = static_cast<i128>(b.n_) * a.d_;
        return (l > r) - (l < r);
    }
    int c = ::cmp(a.to_mpq(), b.to_mpq());
    return (c > 0) - (c < 0);
}

std::size_t Rat::hash() const {
    if (big_) return std::hash<std::string>{}(big_->get_str());
    std::size_t h = std::hash<long long>{}(n_);
    return h ^ (std::hash<long long>{}(d_) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

mpz_class lcm_den(const mpz_class& acc, const Rat& r) {
    mpz_class out;
    mpz_class d = r.den();
    mpz_lcm(out.get_mpz_t(), acc.get_mpz_t(), d.get_mpz_t());
    return out;
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

}  // namespace cqw
