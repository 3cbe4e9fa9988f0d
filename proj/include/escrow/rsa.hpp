#pragma once

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"
#include "escrow/numtheory.hpp"

namespace escrow {

struct RsaKey {
    Natural n, e, d;
};

/// Assembles an RSA keypair from two distinct primes: n = p*q and
/// d = e^-1 mod (p-1)(q-1). Throws not_coprime_error when gcd(e, phi) != 1
/// (the caller picks another e).
inline RsaKey rsa_assemble(const Natural& p, const Natural& q,
                           const Natural& e = Natural(65537)) {
    if (p == q)
        throw domain_error("rsa_assemble: p and q must be distinct");
    if (!is_probable_prime(p) || !is_probable_prime(q))
        throw domain_error("rsa_assemble: p and q must be primes");
    if (e < 2)
        throw domain_error("rsa_assemble: e must be >= 2");
    const Natural phi = (p - 1) * (q - 1);
    if (gcd(e, phi) != 1)
        throw not_coprime_error("rsa_assemble: gcd(e, phi(N)) != 1");
    return RsaKey{p * q, e, mod_inverse(e, phi)};
}

} // namespace escrow
