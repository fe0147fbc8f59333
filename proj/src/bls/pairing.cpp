#include "blocka2a/bls/pairing.hpp"

#include <stdexcept>

namespace blocka2a::bls {

namespace {

struct LineCoeffs {
    Fp2 a, b, c;  // sparse slots 0, 1, 4 after scaling by the G1 point
};

const Fp& half() {
    static const Fp h = inv(Fp(2ul));
    return h;
}

Fp2 mul_by_b(const Fp2& t) {
    Fp2 r = t + t;  // 2t
    r = r + r;      // 4t
    return mul_by_xi(r);
}

// One double step of the Miller loop in homogeneous projective coordinates,
// emitting the line coefficients evaluated later against the G1 point.
LineCoeffs double_step(Fp2& rx, Fp2& ry, Fp2& rz) {
    Fp2 t0 = sqr(ry);
    Fp2 t1 = sqr(rz);
    Fp2 t2 = mul_by_b(t1 + t1 + t1);  // 3*b*z^2
    Fp2 t3 = t2 + t2 + t2;            // 9*b*z^2
    Fp2 t4 = sqr(ry + rz) - t1 - t0;  // 2*y*z
    Fp2 xx = sqr(rx);
    LineCoeffs line{t2 - t0, xx + xx + xx, neg(t4)};
    rx = (t0 - t3) * rx * ry * half();
    ry = sqr((t0 + t3) * half()) - (sqr(t2) + sqr(t2) + sqr(t2));
    rz = t0 * t4;
    return line;
}

LineCoeffs add_step(Fp2& rx, Fp2& ry, Fp2& rz, const Fp2& qx, const Fp2& qy) {
    Fp2 theta = ry - qy * rz;
    Fp2 lambda = rx - qx * rz;
    LineCoeffs line{theta * qx - lambda * qy, neg(theta), lambda};
    Fp2 t2 = sqr(lambda);
    Fp2 t3 = t2 * lambda;
    Fp2 t4 = t2 * rx;
    Fp2 t5 = t3 - (t4 + t4) + sqr(theta) * rz;
    rx = lambda * t5;
    ry = (t4 - t5) * theta - t3 * ry;
    rz = rz * t3;
    return line;
}

Fp12 eval_line(const Fp12& f, const LineCoeffs& l, const Fp& px, const Fp& py) {
    return f * sparse_014(l.a, l.b * px, l.c * py);
}

}  // namespace

Fp12 miller_loop(const G1& p, const G2& q) {
    if (p.is_infinity() || q.is_infinity()) return Fp12::one();

    Fp px, py;
    to_affine(p, px, py);
    Fp2 qx, qy;
    to_affine(q, qx, qy);

    Fp2 rx = qx, ry = qy, rz = Fp2::one();
    Fp12 f = Fp12::one();

    const mpz_class& c = abs_x();
    long top = static_cast<long>(mpz_sizeinbase(c.get_mpz_t(), 2)) - 1;
    for (long i = top - 1; i >= 0; i--) {
        f = sqr(f);
        f = eval_line(f, double_step(rx, ry, rz), px, py);
        if (mpz_tstbit(c.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
            f = eval_line(f, add_step(rx, ry, rz, qx, qy), px, py);
        }
    }
    if (x_is_negative()) f = conj(f);
    return f;
}

namespace {

// Exponentiation by the curve parameter x (negative), valid on the
// cyclotomic subgroup where conjugation is inversion.
Fp12 cyclotomic_exp_x(const Fp12& f) {
    const mpz_class& c = abs_x();
    Fp12 acc = Fp12::one();
    for (long i = static_cast<long>(mpz_sizeinbase(c.get_mpz_t(), 2)) - 1; i >= 0; i--) {
        acc = sqr(acc);
        if (mpz_tstbit(c.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = acc * f;
    }
    return conj(acc);
}

Fp12 frobenius_n(Fp12 f, int n) {
    for (int i = 0; i < n; i++) f = frobenius(f);
    return f;
}

}  // namespace

Fp12 final_exponentiation(const Fp12& f) {
    // Easy part: f^((p^6 - 1)(p^2 + 1))
    Fp12 t1 = inv(f);
    Fp12 m = conj(f) * t1;
    m = frobenius_n(m, 2) * m;

    // Hard part: m^(3*(p^4 - p^2 + 1)/r) via the standard x-addition chain.
    Fp12 a1 = conj(sqr(m));            // m^-2
    Fp12 t3 = cyclotomic_exp_x(m);     // m^x
    Fp12 t4 = sqr(t3);                 // m^2x
    Fp12 t5 = a1 * t3;                 // m^(x-2)
    Fp12 b1 = cyclotomic_exp_x(t5);    // m^(x^2-2x)
    Fp12 t0 = cyclotomic_exp_x(b1);    // m^(x^3-2x^2)
    Fp12 t6 = cyclotomic_exp_x(t0);    // m^(x^4-2x^3)
    t6 = t6 * t4;                      // m^(x^4-2x^3+2x)
    t4 = cyclotomic_exp_x(t6);         // m^(x^5-2x^4+2x^2)
    t5 = conj(t5);                     // m^(2-x)
    t4 = t4 * t5 * m;                  // m^(x^5-2x^4+2x^2-x+3)
    t5 = conj(m);                      // m^-1
    b1 = b1 * m;                       // m^(x^2-2x+1)
    b1 = frobenius_n(b1, 3);
    t6 = t6 * t5;                      // m^(x^4-2x^3+2x-1)
    t6 = frobenius(t6);
    t3 = t3 * t0;                      // m^(x^3-2x^2+x)
    t3 = frobenius_n(t3, 2);
    t3 = t3 * b1 * t6;
    return t3 * t4;
}

Fp12 final_exponentiation_generic(const Fp12& f) {
    static const mpz_class e = [] {
        mpz_class p12;
        mpz_pow_ui(p12.get_mpz_t(), field_modulus().get_mpz_t(), 12);
        mpz_class num = p12 - 1;
        if (num % group_order() != 0) throw std::logic_error("r does not divide p^12-1");
        return mpz_class(num / group_order());
    }();
    return pow(f, e);
}

Fp12 pairing(const G1& p, const G2& q) { return final_exponentiation(miller_loop(p, q)); }

bool pairing_product_is_one(const std::vector<G1>& ps, const std::vector<G2>& qs) {
    if (ps.size() != qs.size()) throw std::invalid_argument("pairing product arity mismatch");
    Fp12 acc = Fp12::one();
    for (size_t i = 0; i < ps.size(); i++) acc = acc * miller_loop(ps[i], qs[i]);
    return final_exponentiation(acc).is_one();
}

}  // namespace blocka2a::bls
