#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace autocensus {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

BigInt pow2(const BigInt& e);
BigInt ipow(const BigInt& base, unsigned e);
BigInt factorial(unsigned n);
BigInt binomial(long long n, long long k);
// Falling factorial n (n-1) ... (n-k+1); zero when k > n.
BigInt falling(long long n, long long k);

std::string to_string(const BigInt& v);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

}  // namespace autocensus
