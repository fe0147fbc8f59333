#pragma once

#include <array>
#include <optional>

#include "blocka2a/bls/fields.hpp"
#include "blocka2a/digest.hpp"

namespace blocka2a::bls {

// Jacobian-coordinate point on y^2 = x^3 + b. F is Fp (G1) or Fp2 (G2).
template <typename F>
struct Point {
    F x, y, z;  // z = 0 encodes the point at infinity

    static Point infinity() { return Point{F(), F(), F()}; }
    bool is_infinity() const { return z.is_zero(); }
};

using G1 = Point<Fp>;
using G2 = Point<Fp2>;

const Fp& g1_b();   // 4
const Fp2& g2_b();  // 4(u+1)

const G1& g1_generator();
const G2& g2_generator();

template <typename F>
Point<F> pt_double(const Point<F>& p);
template <typename F>
Point<F> pt_add(const Point<F>& p, const Point<F>& q);
template <typename F>
Point<F> pt_neg(const Point<F>& p);
template <typename F>
Point<F> pt_mul(const Point<F>& p, const mpz_class& k);
template <typename F>
bool pt_equal(const Point<F>& p, const Point<F>& q);
template <typename F>
void to_affine(const Point<F>& p, F& ax, F& ay);

bool g1_on_curve(const G1& p);
bool g2_on_curve(const G2& p);
bool g1_in_subgroup(const G1& p);
bool g2_in_subgroup(const G2& p);

// ZCash-style compressed encodings: 48 bytes for G1, 96 for G2.
std::array<uint8_t, 48> g1_compress(const G1& p);
std::array<uint8_t, 96> g2_compress(const G2& p);
G1 g1_decompress(BytesView b);  // throws DecodeError on malformed/off-curve input
G2 g2_decompress(BytesView b);

// Deterministic try-and-increment hash to the r-order subgroup of G1.
G1 hash_to_g1(BytesView msg, std::string_view domain_tag);

}  // namespace blocka2a::bls
