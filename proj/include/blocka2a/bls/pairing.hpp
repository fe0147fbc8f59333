#pragma once

#include <vector>

#include "blocka2a/bls/curve.hpp"
#include "blocka2a/bls/fields.hpp"

namespace blocka2a::bls {

// Optimal ate Miller loop; inputs must be in the prime-order subgroups.
Fp12 miller_loop(const G1& p, const G2& q);

// Final exponentiation f^((p^12-1)/r) up to a fixed exponent coprime to r.
Fp12 final_exponentiation(const Fp12& f);

// Reference final exponentiation by plain square-and-multiply over the full
// exponent. Slow; kept as the independent check for the optimized path.
Fp12 final_exponentiation_generic(const Fp12& f);

Fp12 pairing(const G1& p, const G2& q);

// true iff prod_i e(p_i, q_i) == 1 in GT.
bool pairing_product_is_one(const std::vector<G1>& ps, const std::vector<G2>& qs);

}  // namespace blocka2a::bls
