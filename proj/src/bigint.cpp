#include "autocensus/bigint.hpp"

#include "autocensus/error.hpp"

namespace autocensus {

BigInt pow2(const BigInt& e) {
    if (e < 0) throw Error("pow2: negative exponent");
    if (e > 100000000) throw GuardError("exponent", "2^e too large to materialize");
    BigInt r = 1;
    r <<= static_cast<unsigned>(e);
    return r;
}

BigInt ipow(const BigInt& base, unsigned e) {
    BigInt r = 1;
    for (unsigned i = 0; i < e; ++i) r *= base;
    return r;
}

BigInt factorial(unsigned n) {
    BigInt r = 1;
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return r;
}

BigInt binomial(long long n, long long k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (long long i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

BigInt falling(long long n, long long k) {
    if (k < 0) return 0;
    BigInt r = 1;
    for (long long i = 0; i < k; ++i) {
        if (n - i <= 0) return 0;
        r *= (n - i);
    }
    return r;
}

std::string to_string(const BigInt& v) { return v.str(); }

std::string to_string(const Rational& q) {
    if (boost::multiprecision::denominator(q) == 1) return boost::multiprecision::numerator(q).str();
    return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace autocensus
