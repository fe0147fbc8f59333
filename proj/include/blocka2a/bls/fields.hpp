#pragma once

#include <gmpxx.h>

#include <cstdint>

#include "blocka2a/bytes.hpp"

namespace blocka2a::bls {

// BLS12-381 parameter x (negative). |x| = 0xd201000000010000.
// p and r are derived from x at startup and cross-checked against the
// standard hex constants in params_selftest().
const mpz_class& abs_x();
bool x_is_negative();
const mpz_class& field_modulus();   // p, 381 bits
const mpz_class& group_order();     // r, 255 bits
const mpz_class& g1_cofactor();     // (x-1)^2 / 3
void params_selftest();

// ---------------------------------------------------------------------------
// Fp — prime field, canonical representative in [0, p)
// ---------------------------------------------------------------------------
struct Fp {
    mpz_class v;

    Fp() : v(0) {}
    explicit Fp(unsigned long x) : v(x) {}
    explicit Fp(const mpz_class& x);

    bool is_zero() const { return v == 0; }
    bool operator==(const Fp&) const = default;
};

Fp operator+(const Fp& a, const Fp& b);
Fp operator-(const Fp& a, const Fp& b);
Fp operator*(const Fp& a, const Fp& b);
Fp neg(const Fp& a);
Fp sqr(const Fp& a);
Fp inv(const Fp& a);
Fp pow(const Fp& a, const mpz_class& e);
// Square root for p = 3 mod 4; returns false when a is not a square.
bool sqrt(Fp& out, const Fp& a);
Fp fp_from_bytes_mod(BytesView b);
void fp_to_bytes48(const Fp& a, uint8_t out[48]);
Fp fp_from_bytes48(const uint8_t in[48]);

// ---------------------------------------------------------------------------
// Fp2 = Fp[u] / (u^2 + 1)
// ---------------------------------------------------------------------------
struct Fp2 {
    Fp c0, c1;  // c0 + c1*u

    Fp2() = default;
    Fp2(Fp a, Fp b) : c0(std::move(a)), c1(std::move(b)) {}

    static Fp2 zero() { return Fp2(); }
    static Fp2 one() { return Fp2(Fp(1ul), Fp()); }
    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool operator==(const Fp2&) const = default;
};

Fp2 operator+(const Fp2& a, const Fp2& b);
Fp2 operator-(const Fp2& a, const Fp2& b);
Fp2 operator*(const Fp2& a, const Fp2& b);
Fp2 operator*(const Fp2& a, const Fp& s);
Fp2 neg(const Fp2& a);
Fp2 conj(const Fp2& a);
Fp2 sqr(const Fp2& a);
Fp2 inv(const Fp2& a);
Fp2 pow(const Fp2& a, const mpz_class& e);
Fp2 mul_by_xi(const Fp2& a);  // multiply by xi = u + 1
bool sqrt(Fp2& out, const Fp2& a);
Fp2 fp2_scalar(unsigned long k);

// ---------------------------------------------------------------------------
// Fp6 = Fp2[v] / (v^3 - xi)
// ---------------------------------------------------------------------------
struct Fp6 {
    Fp2 c0, c1, c2;  // c0 + c1*v + c2*v^2

    static Fp6 zero() { return Fp6{}; }
    static Fp6 one() { return Fp6{Fp2::one(), Fp2::zero(), Fp2::zero()}; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    bool operator==(const Fp6&) const = default;
};

Fp6 operator+(const Fp6& a, const Fp6& b);
Fp6 operator-(const Fp6& a, const Fp6& b);
Fp6 operator*(const Fp6& a, const Fp6& b);
Fp6 operator*(const Fp6& a, const Fp2& s);
Fp6 neg(const Fp6& a);
Fp6 sqr(const Fp6& a);
Fp6 inv(const Fp6& a);
Fp6 mul_by_v(const Fp6& a);  // multiply by v

// ---------------------------------------------------------------------------
// Fp12 = Fp6[w] / (w^2 - v)
// ---------------------------------------------------------------------------
struct Fp12 {
    Fp6 c0, c1;  // c0 + c1*w

    static Fp12 zero() { return Fp12{}; }
    static Fp12 one() { return Fp12{Fp6::one(), Fp6::zero()}; }
    bool is_one() const { return *this == one(); }
    bool operator==(const Fp12&) const = default;
};

Fp12 operator*(const Fp12& a, const Fp12& b);
Fp12 sqr(const Fp12& a);
Fp12 inv(const Fp12& a);
Fp12 conj(const Fp12& a);  // = ^(p^6)
Fp12 frobenius(const Fp12& a);
Fp12 pow(const Fp12& a, const mpz_class& e);

// Sparse Fp12 with nonzero Fp2 coefficients at basis slots 1, v and v*w.
Fp12 sparse_014(const Fp2& e0, const Fp2& e1, const Fp2& e4);

}  // namespace blocka2a::bls
