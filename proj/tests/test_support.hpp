#pragma once

// Exact-rational helpers shared by the unit tests. Everything here goes
// through GMP rationals, independently of the MPFR paths under test.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <tsm/apfloat.hpp>

namespace tsm_test {

// Exact value of a multiple-precision number.
inline mpq_class to_rational(const tsm::mp::Real& v)
{
    if (v.is_zero())
        return 0;
    mpz_class m;
    const long e = mpfr_get_z_2exp(m.get_mpz_t(), v.get());
    mpq_class q(m);
    mpz_class p2;
    mpz_ui_pow_ui(p2.get_mpz_t(), 2, static_cast<unsigned long>(std::labs(e)));
    if (e >= 0)
        q *= p2;
    else
        q /= p2;
    q.canonicalize();
    return q;
}

// Exact value of a decimal literal such as "-15.8" or "1e-8".
inline mpq_class decimal_rational(const std::string& text)
{
    std::string s = text;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        s.erase(0, 1);
    }
    long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
        exp10 = std::stol(s.substr(e + 1));
        s.erase(e);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        exp10 -= static_cast<long>(s.size() - dot - 1);
        s.erase(dot, 1);
    }
    mpz_class digits(s, 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
    mpq_class q = exp10 >= 0 ? mpq_class(digits * scale) : mpq_class(digits, scale);
    q.canonicalize();
    return neg ? mpq_class(-q) : q;
}

// Unit in the last place of v at its own precision (v nonzero).
inline mpq_class ulp_of(const tsm::mp::Real& v)
{
    const long e = static_cast<long>(mpfr_get_exp(v.get())) - v.precision_bits();
    mpz_class p2;
    mpz_ui_pow_ui(p2.get_mpz_t(), 2, static_cast<unsigned long>(std::labs(e)));
    mpq_class u = e >= 0 ? mpq_class(p2) : mpq_class(mpz_class(1), p2);
    u.canonicalize();
    return u;
}

// |v - exact| measured in ulps of v.
inline double ulps_from(const tsm::mp::Real& v, const mpq_class& exact)
{
    const mpq_class diff = abs(to_rational(v) - exact);
    if (diff == 0)
        return 0.0;
    if (v.is_zero())
        return INFINITY;
    return mpq_class(diff / ulp_of(v)).get_d();
}

// Random nonzero value with `bits` random significand bits and a binary
// exponent in [emin, emax].
inline tsm::mp::Real random_real(std::mt19937_64& rng, const tsm::mp::Context& ctx, long emin = -8, long emax = 8)
{
    tsm::mp::Real v(ctx);
    mpz_class m = 1;
    const long bits = ctx.precision_bits();
    for (long b = 1; b < bits; b += 64) {
        m <<= 64;
        m += mpz_class(std::to_string(rng()));
    }
    std::uniform_int_distribution<long> expo(emin, emax);
    mpfr_set_z_2exp(v.get(), m.get_mpz_t(), expo(rng) - static_cast<long>(mpz_sizeinbase(m.get_mpz_t(), 2)),
                    MPFR_RNDN);
    if (rng() & 1)
        mpfr_neg(v.get(), v.get(), MPFR_RNDN);
    return v;
}

inline std::vector<double> ranks(std::span<const double> v)
{
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
            ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

// Spearman rank correlation (Pearson on average ranks). NaN when either
// series is constant.
inline double spearman(std::span<const double> a, std::span<const double> b)
{
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

} // namespace tsm_test
