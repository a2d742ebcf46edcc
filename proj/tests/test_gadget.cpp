#include <doctest.h>

#include <qacert/gadget.hpp>

#include "jet.hpp"

#include <random>

using namespace qacert;
using namespace qacert::xnum;
using namespace qacert::gadget;
using qacert::testjet::Jet;

namespace {

bool rel_close(const ScaledReal& a, const ScaledReal& b, const ScaledReal& tol) {
    if (b.is_zero()) return abs(a) <= tol;
    return abs(a - b) <= tol * abs(b);
}

// f^{(j)}(x) of a gadget through truncated power series: expand each pole
// term (x + s - i/m)^{-1} as a jet in s and read off j! * coefficient_j.
ScaledComplex jet_oracle_real_axis(const Gadget& g, unsigned order, const ScaledReal& x) {
    Precision p = g.precision();
    auto total = Jet<ScaledComplex>::zero(order, p);
    for (const Pole& pole : g.poles()) {
        auto lin = Jet<ScaledComplex>::zero(order, p);
        lin.c[0] = ScaledComplex{x, -(ScaledReal::of(1, p) / pole.m)};
        if (order >= 1) lin.c[1] = ScaledComplex::of(1, 0, p);
        auto rec = lin.reciprocal();
        ScaledComplex cc{pole.coeff, ScaledReal(p)};
        for (std::size_t i = 0; i < total.c.size(); ++i)
            total.c[i] = total.c[i] + cc * rec.c[i];
    }
    ScaledReal jf = factorial(order, p);
    return ScaledReal(jf) * total.c[order];
}

// Same through the squared-distance composition q(s) = gamma + 2 beta s + s^2.
ScaledComplex jet_oracle_line(const Gadget& g, const ScaledReal& gamma, const ScaledReal& beta,
                              unsigned order) {
    Precision p = g.precision();
    auto total = Jet<ScaledComplex>::zero(order, p);
    for (const Pole& pole : g.poles()) {
        auto quad = Jet<ScaledComplex>::zero(order, p);
        quad.c[0] = ScaledComplex{gamma, -(ScaledReal::of(1, p) / pole.m)};
        if (order >= 1) quad.c[1] = ScaledComplex{beta.mul_pow2(1), ScaledReal(p)};
        if (order >= 2) quad.c[2] = ScaledComplex::of(1, 0, p);
        auto rec = quad.reciprocal();
        ScaledComplex cc{pole.coeff, ScaledReal(p)};
        for (std::size_t i = 0; i < total.c.size(); ++i)
            total.c[i] = total.c[i] + cc * rec.c[i];
    }
    ScaledReal jf = factorial(order, p);
    return ScaledReal(jf) * total.c[order];
}

}  // namespace

TEST_CASE("single-pole toy: center derivatives are j!") {
    auto toy = Gadget::single_pole_toy();
    for (unsigned j : {0u, 1u, 5u, 12u, 30u}) {
        auto dv = gadget_derivative(toy, j, ScaledReal::of(0));
        CHECK(rel_close(modulus(dv.value), factorial(j), ScaledReal::pow2(-240)));
        CHECK(dv.audit.cancellation_loss_bits == 0);
        CHECK(dv.tail_bound.is_zero());  // no source, single exact pole
    }
    // Decay bound is tight along the imaginary-shifted distance.
    for (const char* xs : {"0.01", "0.3", "2"}) {
        ScaledReal x = ScaledReal::parse(xs);
        for (unsigned j : {0u, 3u, 9u}) {
            auto dv = gadget_derivative(toy, j, x);
            ScaledReal shifted = pow(x * x + ScaledReal::of(1),
                                     ScaledReal::of(static_cast<long>(j) + 1).mul_pow2(-1));
            CHECK(rel_close(modulus(dv.value) * shifted, factorial(j), ScaledReal::pow2(-230)));
            CHECK(modulus(dv.value) <= factorial(j) / pow_si(abs(x), static_cast<long>(j) + 1));
        }
    }
}

TEST_CASE("build_gadget: gevrey(2) coefficients via brute-force phi") {
    auto g2 = weights::catalog_gevrey(ScaledReal::of(2), 64);
    auto g = build_gadget(g2, 1);
    REQUIRE(g.poles().size() == 1);
    CHECK(rel_close(g.poles()[0].m, ScaledReal::of(2), ScaledReal::pow2(-240)));
    // phi(2) = sup 2^{k+1}/k! = 4, so the coefficient is 2^{-1}/4 = 1/8.
    CHECK(rel_close(g.poles()[0].coeff, ScaledReal::parse("0.125"), ScaledReal::pow2(-230)));

    CHECK_THROWS_AS(build_gadget(g2, 0), PreconditionError);
    auto bad = weights::from_table({ScaledReal::of(1), ScaledReal::of(3), ScaledReal::of(4)});
    CHECK_THROWS_AS(build_gadget(bad, 1), PreconditionError);
}

TEST_CASE("build_gadget: log_power poles strictly decreasing imaginary parts") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 64);
    auto g = build_gadget(lp, 32);
    CHECK(g.poles_strictly_decreasing());
    for (std::size_t i = 0; i + 1 < g.poles().size(); ++i)
        CHECK(g.poles()[i].m < g.poles()[i + 1].m);  // 1/m strictly decreasing

    // Pointwise coefficient bound: coeff_k m_k^{j+1} <= 2^{-k} M_j, sampled.
    for (std::size_t pi : {0ul, 7ul, 20ul}) {
        const Pole& pole = g.poles()[pi];
        for (unsigned j : {0u, 3u, 11u}) {
            ScaledReal lhs = pole.coeff * pow_si(pole.m, static_cast<long>(j) + 1);
            ScaledReal rhs = ScaledReal::pow2(-static_cast<long>(pole.first_index)) *
                             exp(lp.log_value(j));
            CHECK(lhs <= rhs * (ScaledReal::of(1) + ScaledReal::pow2(-200)));
        }
    }
}

TEST_CASE("gadget_derivative: phase alignment and the aligned-magnitude sum at 0") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 80);
    auto g = build_gadget(lp, 64);
    Precision p = Precision::dflt();
    for (unsigned j = 0; j <= 60; j += 6) {
        auto dv = gadget_derivative(g, j, ScaledReal(p));
        CHECK(dv.audit.cancellation_loss_bits == 0);
        // Independent magnitude: brute-force phi for each pole.
        ScaledReal expect(p);
        for (std::size_t k = 1; k <= 64; ++k) {
            auto phi = weights::assoc_function(lp, lp.quotient(k), 80);
            ScaledReal term = ScaledReal::pow2(-static_cast<long>(k), p) / phi.value *
                              pow_si(lp.quotient(k), static_cast<long>(j) + 1);
            expect = expect + term;
        }
        expect = expect * factorial(j, p);
        CHECK(rel_close(modulus(dv.value), expect, ScaledReal::pow2(-200)));
    }
}

TEST_CASE("gadget_derivative: center lower bound j! M_j / 2^j") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 80);
    auto g = build_gadget(lp, 64);
    for (unsigned j : {1u, 6u, 17u, 40u}) {
        auto dv = gadget_derivative(g, j, ScaledReal::of(0));
        ScaledReal lower =
            factorial(j) * exp(lp.log_value(j)).mul_pow2(-static_cast<long>(j));
        CHECK(modulus(dv.value) >= lower);
    }
}

TEST_CASE("gadget_derivative: jet oracle on the real axis") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 32);
    auto g = build_gadget(lp, 16);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
        ScaledReal x = ScaledReal::parse(std::to_string(u(rng)));
        for (unsigned j : {0u, 1u, 4u, 8u}) {
            auto dv = gadget_derivative(g, j, x);
            ScaledComplex oracle = jet_oracle_real_axis(g, j, x);
            ScaledReal err = modulus(dv.value - oracle);
            CHECK(err <= ScaledReal::pow2(-128) * max(ScaledReal::of(1), modulus(oracle)));
        }
    }
}

TEST_CASE("gadget_derivative: global bound with tail") {
    auto g2s = weights::catalog_gevrey(ScaledReal::of(2), 96);
    auto g = build_gadget(g2s, 80);
    for (unsigned j : {0u, 5u, 23u}) {
        for (const char* xs : {"0", "0.1", "-1", "3.5"}) {
            ScaledReal x = ScaledReal::parse(xs);
            auto dv = gadget_derivative(g, j, x);
            ScaledReal bound = factorial(j) * exp(g2s.log_value(j));
            CHECK(modulus(dv.value) + dv.tail_bound <=
                  bound * (ScaledReal::of(1) + ScaledReal::pow2(-40)));
        }
    }
}

TEST_CASE("tail bound halves as K_pole grows") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 80);
    ScaledReal x = ScaledReal::parse("0.25");
    ScaledReal prev;
    bool have = false;
    for (std::size_t kp : {16ul, 17ul, 18ul, 19ul}) {
        auto g = build_gadget(lp, kp);
        auto dv = gadget_derivative(g, 7, x);
        if (have) CHECK(dv.tail_bound <= prev * ScaledReal::parse("0.51"));
        prev = dv.tail_bound;
        have = true;
    }
}

TEST_CASE("lift_radial_center_derivative: toy and identity ratio") {
    auto toy = Gadget::single_pole_toy();
    auto lv = lift_radial_center_derivative(toy, 2);
    CHECK(rel_close(modulus(lv.derivative.value), ScaledReal::of(2), ScaledReal::pow2(-240)));

    auto lp = weights::catalog_log_power(ScaledReal::of(1), 140);
    auto g = build_gadget(lp, 128);
    Precision p = Precision::dflt();
    for (unsigned k = 1; k <= 60; ++k) {
        auto lift = lift_radial_center_derivative(g, 2 * k);
        auto inner = gadget_derivative(g, k, ScaledReal(p));
        ScaledReal ratio = modulus(lift.derivative.value) / modulus(inner.value);
        ScaledReal expected = exp(factorial_log(2 * k, p) - factorial_log(k, p));
        CHECK(rel_close(ratio, expected, ScaledReal::pow2(-(p.bits - 16), p)));
    }

    // Certified lower bound at the center.
    auto l5 = lift_radial_center_derivative(g, 10);
    CHECK(l5.lower_bound_pass);
    CHECK(!l5.inconclusive);
    CHECK(modulus(l5.derivative.value) / l5.lower_bound >= ScaledReal::of(1));

    CHECK_THROWS_AS(lift_radial_center_derivative(g, 7), DomainError);
}

TEST_CASE("line_restriction_derivative: base at center reduces to the radial identity") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 64);
    auto g = build_gadget(lp, 48);
    Precision p = Precision::dflt();
    std::vector<ScaledReal> center = {ScaledReal::parse("0.3"), ScaledReal::parse("-0.7")};
    std::vector<ScaledReal> dir = {ScaledReal::of(1, p), ScaledReal(p)};

    auto even = line_restriction_derivative(g, center, center, dir, 8);
    auto lift = lift_radial_center_derivative(g, 8);
    CHECK(modulus(even.value - lift.derivative.value).is_zero());

    auto odd = line_restriction_derivative(g, center, center, dir, 7);
    CHECK(odd.value.is_zero());
    CHECK(odd.tail_bound.is_zero());
}

TEST_CASE("line_restriction_derivative: jet oracle") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 32);
    auto g = build_gadget(lp, 16);
    Precision p = Precision::dflt();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ScaledReal> center = {ScaledReal::parse(std::to_string(u(rng))),
                                          ScaledReal::parse(std::to_string(u(rng)))};
        std::vector<ScaledReal> base = {ScaledReal::parse(std::to_string(u(rng) + 2.5)),
                                        ScaledReal::parse(std::to_string(u(rng)))};
        // Random unit direction.
        ScaledReal a = ScaledReal::parse(std::to_string(u(rng))),
                   b = ScaledReal::parse(std::to_string(u(rng) + 0.1));
        ScaledReal norm = hypot(a, b);
        std::vector<ScaledReal> dir = {a / norm, b / norm};
        LineQuery q = line_query(center, base, dir, p);
        for (unsigned j : {0u, 1u, 2u, 5u, 8u, 12u}) {
            auto dv = line_restriction_derivative(g, center, base, dir, j);
            auto oracle = jet_oracle_line(g, q.gamma, q.beta, j);
            ScaledReal err = modulus(dv.value - oracle);
            CHECK(err <= ScaledReal::pow2(-(p.bits / 2), p) *
                             max(ScaledReal::of(1, p), modulus(oracle)));
        }
    }
}

TEST_CASE("line_restriction_derivative: single-pole toy against the jet oracle") {
    auto toy = Gadget::single_pole_toy();
    Precision p = Precision::dflt();
    // base - center = (1, 0): q(s) = (1+s)^2, pole term 1/(q(s) - i).
    std::vector<ScaledReal> center = {ScaledReal(p), ScaledReal(p)};
    std::vector<ScaledReal> base = {ScaledReal::of(1, p), ScaledReal(p)};
    std::vector<ScaledReal> dir = {ScaledReal::of(1, p), ScaledReal(p)};
    for (unsigned j = 0; j <= 8; ++j) {
        auto dv = line_restriction_derivative(toy, center, base, dir, j);
        auto oracle = jet_oracle_line(toy, ScaledReal::of(1, p), ScaledReal::of(1, p), j);
        CHECK(modulus(dv.value - oracle) <=
              ScaledReal::pow2(-200) * max(ScaledReal::of(1, p), modulus(oracle)));
    }
    // Order 0 is the plain evaluation at gamma.
    auto d0 = line_restriction_derivative(toy, center, base, dir, 0);
    ScaledComplex direct = ScaledComplex::of(1, 0, p) /
                           ScaledComplex{ScaledReal::of(1, p), -ScaledReal::of(1, p)};
    CHECK(modulus(d0.value - direct) <= ScaledReal::pow2(-240));
}

TEST_CASE("line_restriction_derivative: skipped poles land in the tail") {
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 200);
    auto g = build_gadget(lp, 180);
    Precision p = Precision::dflt();
    std::vector<ScaledReal> center = {ScaledReal::parse("0.2"), ScaledReal::parse("0.4")};
    std::vector<ScaledReal> base = {ScaledReal::parse("0.9"), ScaledReal::parse("-0.3")};
    std::vector<ScaledReal> dir = {ScaledReal::of(1, p), ScaledReal(p)};

    auto exact = line_restriction_derivative(g, center, base, dir, 9);
    EvalOptions opt;
    opt.skip_below = modulus(exact.value) * ScaledReal::pow2(-90);
    auto skimmed = line_restriction_derivative(g, center, base, dir, 9, opt);
    CHECK(modulus(exact.value - skimmed.value) <=
          skimmed.tail_bound + exact.tail_bound + ScaledReal::pow2(-80) * modulus(exact.value));
    CHECK(skimmed.tail_bound <= modulus(exact.value) * ScaledReal::pow2(-60));
}

TEST_CASE("verify_gadget_bounds: catalog sequences pass for j <= 40") {
    std::vector<ScaledReal> xs = {ScaledReal::of(0), ScaledReal::parse("0.1"),
                                  ScaledReal::parse("-0.1"), ScaledReal::of(1),
                                  -ScaledReal::of(1)};
    for (auto seq : {weights::catalog_log_power(ScaledReal::of(1), 96),
                     weights::catalog_gevrey(ScaledReal::of(2), 96)}) {
        auto g = build_gadget(seq, 80);
        auto rep = verify_gadget_bounds(g, 40, xs);
        CHECK(rep.all_pass);
        CHECK(rep.max_relative_tail < ScaledReal::pow2(-60));
    }
}
