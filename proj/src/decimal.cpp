#include <tsm/decimal.hpp>

#include <gmpxx.h>

#include <cctype>
#include <string>

#include <tsm/error.hpp>

namespace tsm::decimal {

namespace {

// Exact rational value of a decimal literal.
mpq_class to_rational(std::string_view text)
{
    require_literal(text, "value");
    std::string s(text);
    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
        exponent = std::stol(s.substr(e + 1));
        s.erase(e);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        exponent -= static_cast<long>(s.size() - dot - 1);
        s.erase(dot, 1);
    }
    mpz_class digits(s.empty() ? "0" : s, 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    mpq_class q = exponent < 0 ? mpq_class(digits, scale) : mpq_class(digits * scale);
    q.canonicalize();
    return negative ? mpq_class(-q) : q;
}

std::string to_plain(const mpq_class& q)
{
    // Denominators here are powers of ten (times integers), so the expansion
    // terminates; emit it digit by digit.
    mpz_class num = q.get_num();
    const mpz_class den = q.get_den();
    std::string out;
    if (num < 0) {
        out = "-";
        num = -num;
    }
    mpz_class whole = num / den;
    mpz_class rem = num % den;
    out += whole.get_str();
    if (rem != 0) {
        out += '.';
        for (int guard = 0; rem != 0 && guard < 100000; ++guard) {
            rem *= 10;
            mpz_class digit = rem / den;
            rem %= den;
            out += digit.get_str();
        }
    }
    return out;
}

} // namespace

bool is_literal(std::string_view s)
{
    std::size_t i = 0;
    const auto n = s.size();
    auto digits = [&] {
        const auto start = i;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i])))
            ++i;
        return i - start;
    };
    if (i < n && (s[i] == '+' || s[i] == '-'))
        ++i;
    auto mantissa = digits();
    if (i < n && s[i] == '.') {
        ++i;
        mantissa += digits();
    }
    if (mantissa == 0)
        return false;
    if (i < n && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < n && (s[i] == '+' || s[i] == '-'))
            ++i;
        const auto exp_digits = digits();
        if (exp_digits == 0 || exp_digits > 9)
            return false;
    }
    return i == n;
}

void require_literal(std::string_view text, std::string_view what)
{
    if (!is_literal(text))
        throw ParseError(std::string(what) + ": not a decimal number: '" + std::string(text) + "'");
}

std::string times(std::string_view value, std::size_t n)
{
    return to_plain(to_rational(value) * mpq_class(mpz_class(std::to_string(n), 10)));
}

std::optional<std::size_t> exact_quotient(std::string_view numerator, std::string_view denominator)
{
    const mpq_class den = to_rational(denominator);
    if (den == 0)
        return std::nullopt;
    const mpq_class q = to_rational(numerator) / den;
    if (q.get_den() != 1 || q < 0)
        return std::nullopt;
    if (!q.get_num().fits_ulong_p())
        return std::nullopt;
    return static_cast<std::size_t>(q.get_num().get_ui());
}

double to_double(std::string_view value) { return to_rational(value).get_d(); }

} // namespace tsm::decimal
