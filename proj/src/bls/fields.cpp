#include "blocka2a/bls/fields.hpp"

#include <stdexcept>

namespace blocka2a::bls {

namespace {

mpz_class make_abs_x() { return mpz_class("d201000000010000", 16); }

// p = ((x-1)^2 * (x^4 - x^2 + 1)) / 3 + x, with x negative.
mpz_class derive_p() {
    mpz_class x = -make_abs_x();
    mpz_class r = x * x * x * x - x * x + 1;
    mpz_class p = (x - 1) * (x - 1) * r;
    if (p % 3 != 0) throw std::logic_error("bls parameter derivation failed");
    p /= 3;
    p += x;
    return p;
}

mpz_class derive_r() {
    mpz_class x = -make_abs_x();
    return x * x * x * x - x * x + 1;
}

mpz_class derive_h1() {
    mpz_class x = -make_abs_x();
    mpz_class h = (x - 1) * (x - 1);
    if (h % 3 != 0) throw std::logic_error("bls cofactor derivation failed");
    return h / 3;
}

}  // namespace

const mpz_class& abs_x() {
    static const mpz_class v = make_abs_x();
    return v;
}

bool x_is_negative() { return true; }

const mpz_class& field_modulus() {
    static const mpz_class p = derive_p();
    return p;
}

const mpz_class& group_order() {
    static const mpz_class r = derive_r();
    return r;
}

const mpz_class& g1_cofactor() {
    static const mpz_class h = derive_h1();
    return h;
}

void params_selftest() {
    static const mpz_class p_ref(
        "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f624"
        "1eabfffeb153ffffb9feffffffffaaab",
        16);
    static const mpz_class r_ref("73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001", 16);
    if (field_modulus() != p_ref) throw std::logic_error("derived p does not match reference");
    if (group_order() != r_ref) throw std::logic_error("derived r does not match reference");
    if (field_modulus() % 4 != 3) throw std::logic_error("p mod 4 != 3");
    if ((field_modulus() - 1) % 6 != 0) throw std::logic_error("p mod 6 != 1");
}

// ---------------------------------------------------------------------------
// Fp
// ---------------------------------------------------------------------------

Fp::Fp(const mpz_class& x) : v(x) {
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), field_modulus().get_mpz_t());
}

Fp operator+(const Fp& a, const Fp& b) {
    Fp c;
    c.v = a.v + b.v;
    if (c.v >= field_modulus()) c.v -= field_modulus();
    return c;
}

Fp operator-(const Fp& a, const Fp& b) {
    Fp c;
    c.v = a.v - b.v;
    if (c.v < 0) c.v += field_modulus();
    return c;
}

Fp operator*(const Fp& a, const Fp& b) {
    Fp c;
    c.v = a.v * b.v;
    mpz_mod(c.v.get_mpz_t(), c.v.get_mpz_t(), field_modulus().get_mpz_t());
    return c;
}

Fp neg(const Fp& a) {
    Fp c;
    if (a.v != 0) c.v = field_modulus() - a.v;
    return c;
}

Fp sqr(const Fp& a) { return a * a; }

Fp inv(const Fp& a) {
    if (a.is_zero()) throw std::domain_error("inverse of zero in Fp");
    Fp c;
    mpz_invert(c.v.get_mpz_t(), a.v.get_mpz_t(), field_modulus().get_mpz_t());
    return c;
}

Fp pow(const Fp& a, const mpz_class& e) {
    Fp c;
    mpz_powm(c.v.get_mpz_t(), a.v.get_mpz_t(), e.get_mpz_t(), field_modulus().get_mpz_t());
    return c;
}

bool sqrt(Fp& out, const Fp& a) {
    if (a.is_zero()) {
        out = Fp();
        return true;
    }
    static const mpz_class e = (field_modulus() + 1) / 4;
    Fp cand = pow(a, e);
    if (sqr(cand) == a) {
        out = cand;
        return true;
    }
    return false;
}

Fp fp_from_bytes_mod(BytesView b) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    return Fp(v);
}

void fp_to_bytes48(const Fp& a, uint8_t out[48]) {
    for (int i = 0; i < 48; i++) out[i] = 0;
    size_t count = 0;
    // big-endian, right-aligned in the 48-byte window
    Bytes tmp((mpz_sizeinbase(a.v.get_mpz_t(), 2) + 7) / 8, 0);
    if (a.v != 0) {
        mpz_export(tmp.data(), &count, 1, 1, 1, 0, a.v.get_mpz_t());
        if (count > 48) throw std::logic_error("fp value exceeds 48 bytes");
        std::copy(tmp.begin(), tmp.begin() + count, out + (48 - count));
    }
}

Fp fp_from_bytes48(const uint8_t in[48]) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), 48, 1, 1, 1, 0, in);
    if (v >= field_modulus()) throw std::invalid_argument("field element not canonical");
    Fp c;
    c.v = v;
    return c;
}

// ---------------------------------------------------------------------------
// Fp2
// ---------------------------------------------------------------------------

Fp2 operator+(const Fp2& a, const Fp2& b) { return Fp2(a.c0 + b.c0, a.c1 + b.c1); }
Fp2 operator-(const Fp2& a, const Fp2& b) { return Fp2(a.c0 - b.c0, a.c1 - b.c1); }

Fp2 operator*(const Fp2& a, const Fp2& b) {
    // Karatsuba over u^2 = -1
    Fp t0 = a.c0 * b.c0;
    Fp t1 = a.c1 * b.c1;
    Fp t2 = (a.c0 + a.c1) * (b.c0 + b.c1);
    return Fp2(t0 - t1, t2 - t0 - t1);
}

Fp2 operator*(const Fp2& a, const Fp& s) { return Fp2(a.c0 * s, a.c1 * s); }

Fp2 neg(const Fp2& a) { return Fp2(neg(a.c0), neg(a.c1)); }
Fp2 conj(const Fp2& a) { return Fp2(a.c0, neg(a.c1)); }

Fp2 sqr(const Fp2& a) {
    // (c0 + c1 u)^2 = (c0+c1)(c0-c1) + 2 c0 c1 u
    Fp t0 = (a.c0 + a.c1) * (a.c0 - a.c1);
    Fp t1 = a.c0 * a.c1;
    return Fp2(t0, t1 + t1);
}

Fp2 inv(const Fp2& a) {
    // 1/(c0 + c1 u) = (c0 - c1 u) / (c0^2 + c1^2)
    Fp norm = sqr(a.c0) + sqr(a.c1);
    Fp ninv = inv(norm);
    return Fp2(a.c0 * ninv, neg(a.c1) * ninv);
}

Fp2 pow(const Fp2& a, const mpz_class& e) {
    Fp2 acc = Fp2::one();
    for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; i--) {
        acc = sqr(acc);
        if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = acc * a;
    }
    return acc;
}

Fp2 mul_by_xi(const Fp2& a) {
    // (c0 + c1 u)(1 + u) = (c0 - c1) + (c0 + c1) u
    return Fp2(a.c0 - a.c1, a.c0 + a.c1);
}

bool sqrt(Fp2& out, const Fp2& a) {
    if (a.is_zero()) {
        out = Fp2::zero();
        return true;
    }
    // p = 3 mod 4 variant; candidate verified at the end so a wrong branch
    // can never return a bogus root.
    static const mpz_class e1 = (field_modulus() - 3) / 4;
    static const mpz_class e2 = (field_modulus() - 1) / 2;
    Fp2 a1 = pow(a, e1);
    Fp2 x0 = a1 * a;
    Fp2 alpha = a1 * x0;
    Fp2 cand;
    if (alpha == Fp2(neg(Fp(1ul)), Fp())) {
        cand = Fp2(neg(x0.c1), x0.c0);  // multiply by u
    } else {
        Fp2 b = pow(Fp2::one() + alpha, e2);
        cand = b * x0;
    }
    if (sqr(cand) == a) {
        out = cand;
        return true;
    }
    return false;
}

Fp2 fp2_scalar(unsigned long k) { return Fp2(Fp(k), Fp()); }

// ---------------------------------------------------------------------------
// Fp6
// ---------------------------------------------------------------------------

Fp6 operator+(const Fp6& a, const Fp6& b) { return Fp6{a.c0 + b.c0, a.c1 + b.c1, a.c2 + b.c2}; }
Fp6 operator-(const Fp6& a, const Fp6& b) { return Fp6{a.c0 - b.c0, a.c1 - b.c1, a.c2 - b.c2}; }

Fp6 operator*(const Fp6& a, const Fp6& b) {
    Fp2 t0 = a.c0 * b.c0;
    Fp2 t1 = a.c1 * b.c1;
    Fp2 t2 = a.c2 * b.c2;
    Fp2 c0 = t0 + mul_by_xi((a.c1 + a.c2) * (b.c1 + b.c2) - t1 - t2);
    Fp2 c1 = (a.c0 + a.c1) * (b.c0 + b.c1) - t0 - t1 + mul_by_xi(t2);
    Fp2 c2 = (a.c0 + a.c2) * (b.c0 + b.c2) - t0 - t2 + t1;
    return Fp6{c0, c1, c2};
}

Fp6 operator*(const Fp6& a, const Fp2& s) { return Fp6{a.c0 * s, a.c1 * s, a.c2 * s}; }

Fp6 neg(const Fp6& a) { return Fp6{neg(a.c0), neg(a.c1), neg(a.c2)}; }

Fp6 sqr(const Fp6& a) { return a * a; }

Fp6 inv(const Fp6& a) {
    Fp2 c0 = sqr(a.c0) - mul_by_xi(a.c1 * a.c2);
    Fp2 c1 = mul_by_xi(sqr(a.c2)) - a.c0 * a.c1;
    Fp2 c2 = sqr(a.c1) - a.c0 * a.c2;
    Fp2 t = a.c0 * c0 + mul_by_xi(a.c2 * c1) + mul_by_xi(a.c1 * c2);
    Fp2 tinv = inv(t);
    return Fp6{c0 * tinv, c1 * tinv, c2 * tinv};
}

Fp6 mul_by_v(const Fp6& a) {
    // (c0 + c1 v + c2 v^2) * v = xi*c2 + c0 v + c1 v^2
    return Fp6{mul_by_xi(a.c2), a.c0, a.c1};
}

// ---------------------------------------------------------------------------
// Fp12
// ---------------------------------------------------------------------------

Fp12 operator*(const Fp12& a, const Fp12& b) {
    Fp6 t0 = a.c0 * b.c0;
    Fp6 t1 = a.c1 * b.c1;
    Fp6 c0 = t0 + mul_by_v(t1);
    Fp6 c1 = (a.c0 + a.c1) * (b.c0 + b.c1) - t0 - t1;
    return Fp12{c0, c1};
}

Fp12 sqr(const Fp12& a) { return a * a; }

Fp12 inv(const Fp12& a) {
    // 1/(c0 + c1 w) = (c0 - c1 w) / (c0^2 - c1^2 v)
    Fp6 t = sqr(a.c0) - mul_by_v(sqr(a.c1));
    Fp6 tinv = inv(t);
    return Fp12{a.c0 * tinv, neg(a.c1) * tinv};
}

Fp12 conj(const Fp12& a) { return Fp12{a.c0, neg(a.c1)}; }

namespace {

// gamma[i] = xi^(i*(p-1)/6), computed once.
const Fp2& frob_gamma(int i) {
    static const auto gammas = [] {
        std::array<Fp2, 6> g;
        g[0] = Fp2::one();
        const mpz_class e = (field_modulus() - 1) / 6;
        const Fp2 xi(Fp(1ul), Fp(1ul));
        for (int k = 1; k <= 5; k++) g[k] = pow(xi, e * k);
        return g;
    }();
    return gammas[i];
}

Fp6 frobenius6(const Fp6& a) {
    return Fp6{conj(a.c0), conj(a.c1) * frob_gamma(2), conj(a.c2) * frob_gamma(4)};
}

}  // namespace

Fp12 frobenius(const Fp12& a) {
    return Fp12{frobenius6(a.c0), frobenius6(a.c1) * frob_gamma(1)};
}

Fp12 pow(const Fp12& a, const mpz_class& e) {
    Fp12 acc = Fp12::one();
    for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; i--) {
        acc = sqr(acc);
        if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = acc * a;
    }
    return acc;
}

Fp12 sparse_014(const Fp2& e0, const Fp2& e1, const Fp2& e4) {
    Fp12 f = Fp12::zero();
    f.c0.c0 = e0;
    f.c0.c1 = e1;
    f.c1.c1 = e4;
    return f;
}

}  // namespace blocka2a::bls
