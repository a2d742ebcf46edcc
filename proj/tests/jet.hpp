// Test-only truncated power series ("jets") used as independent oracles for
// derivative computations.  Deliberately naive: convolution products and the
// standard reciprocal recurrence, nothing shared with the library's partial
// fraction paths.

#ifndef QACERT_TESTS_JET_HPP
#define QACERT_TESTS_JET_HPP

#include <qacert/xnum.hpp>

#include <vector>

namespace qacert::testjet {

using xnum::Precision;
using xnum::ScaledComplex;
using xnum::ScaledReal;

template <typename T>
struct Jet {
    std::vector<T> c;  // coefficients of s^0..s^{order}

    static Jet zero(std::size_t order, Precision p) {
        Jet j;
        j.c.assign(order + 1, T(p));
        return j;
    }

    std::size_t order() const { return c.size() - 1; }

    friend Jet operator+(const Jet& a, const Jet& b) {
        Jet r = a;
        for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = r.c[i] + b.c[i];
        return r;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Precision p = a.c[0].precision();
        Jet r = zero(a.order(), p);
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; i + j < a.c.size() && j < b.c.size(); ++j)
                r.c[i + j] = r.c[i + j] + a.c[i] * b.c[j];
        return r;
    }
    friend Jet scale(const T& s, const Jet& a) {
        Jet r = a;
        for (auto& x : r.c) x = s * x;
        return r;
    }

    // 1 / series, constant term nonzero.
    Jet reciprocal() const {
        Precision p = c[0].precision();
        Jet r = zero(order(), p);
        T one = constant_one(p);
        r.c[0] = one / c[0];
        for (std::size_t n = 1; n < c.size(); ++n) {
            T acc(p);
            for (std::size_t i = 1; i <= n; ++i) acc = acc + c[i] * r.c[n - i];
            r.c[n] = -(acc / c[0]);
        }
        return r;
    }

    static T constant_one(Precision p) {
        if constexpr (std::is_same_v<T, ScaledComplex>)
            return ScaledComplex::of(1, 0, p);
        else
            return ScaledReal::of(1, p);
    }
};

// g(h(s)) truncated, requiring h(0) = 0.
template <typename T>
Jet<T> compose(const Jet<T>& g, const Jet<T>& h) {
    Precision p = g.c[0].precision();
    Jet<T> result = Jet<T>::zero(g.order(), p);
    result.c[0] = g.c[0];
    Jet<T> hpow = Jet<T>::zero(g.order(), p);
    hpow.c[0] = Jet<T>::constant_one(p);
    for (std::size_t j = 1; j < g.c.size(); ++j) {
        hpow = hpow * h;
        for (std::size_t i = 0; i < result.c.size(); ++i)
            result.c[i] = result.c[i] + g.c[j] * hpow.c[i];
    }
    return result;
}

}  // namespace qacert::testjet

#endif  // QACERT_TESTS_JET_HPP
