#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <gmpxx.h>

namespace escrow {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside an operation's stated domain.
class domain_error : public error {
public:
    using error::error;
};

/// mod_inverse called with gcd(a, m) != 1.
class not_invertible : public error {
public:
    using error::error;
};

/// A randomized search ran out of its attempt budget.
class exhausted_error : public error {
public:
    using error::error;
};

/// gcd(e, phi) != 1 when assembling an RSA key.
class not_coprime_error : public error {
public:
    using error::error;
};

/// Recovery aborted because T shares a factor with the semi-prime(s);
/// the gcd itself is a factor hint and is carried along.
class trivial_factor_error : public error {
public:
    trivial_factor_error(const std::string& msg, mpz_class gcd)
        : error(msg), gcd_(std::move(gcd)) {}

    const mpz_class& gcd() const { return gcd_; }

private:
    mpz_class gcd_;
};

/// Malformed instance file.
class parse_error : public error {
public:
    using error::error;
};

} // namespace escrow
