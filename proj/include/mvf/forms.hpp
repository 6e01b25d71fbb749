#pragma once

// Differential forms in the adapted cobasis {dx^mu, dy^A, dv^A_mu} of a
// chart. A k-form is a table from strictly increasing cobasis tuples
// (bitmasks over coordinate indices) to coefficient expressions; wedge,
// exterior derivative, contraction and pullback are explicit multi-index
// bookkeeping on that table.

#include "mvf/vector_field.hpp"
#include "mvf/zero.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace mvf {

using CobasisMask = std::uint64_t;

namespace detail {

inline int popcount(CobasisMask m) { return __builtin_popcountll(m); }

/// Sign of e_A ^ e_B for disjoint ascending tuples: (-1)^(inversions), where
/// an inversion is a pair i in A, j in B with i > j.
inline int wedge_sign(CobasisMask a, CobasisMask b) {
    int inv = 0;
    for (CobasisMask bb = b; bb; bb &= bb - 1) {
        int j = __builtin_ctzll(bb);
        inv += popcount(a >> (j + 1));
    }
    return inv % 2 == 0 ? 1 : -1;
}

/// Position (0-based) of bit i among the set bits of mask.
inline int bit_position(CobasisMask mask, int i) {
    return popcount(mask & ((CobasisMask(1) << i) - 1));
}

}  // namespace detail

class AdaptedForm {
public:
    AdaptedForm() = default;
    AdaptedForm(ChartSpec chart, int degree) : chart_(std::move(chart)), degree_(degree) {
        if (degree_ < 0 || degree_ > static_cast<int>(chart_.dim()))
            throw ChartError("form degree out of range");
    }

    static AdaptedForm scalar(ChartSpec chart, Expr value) {
        AdaptedForm f(std::move(chart), 0);
        f.add(0, std::move(value));
        return f;
    }
    /// The cobasis 1-form dq^i.
    static AdaptedForm d_coord(ChartSpec chart, std::size_t i) {
        AdaptedForm f(std::move(chart), 1);
        f.add(CobasisMask(1) << i, Expr::num(1));
        return f;
    }

    const ChartSpec& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::map<CobasisMask, Expr>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    Expr coefficient(CobasisMask mask) const {
        auto it = terms_.find(mask);
        return it == terms_.end() ? Expr::num(0) : it->second;
    }

    void add(CobasisMask mask, Expr coeff) {
        if (detail::popcount(mask) != degree_) throw ChartError("mask degree mismatch");
        if (coeff.is_zero_constant()) return;
        auto it = terms_.find(mask);
        if (it == terms_.end()) {
            terms_[mask] = std::move(coeff);
        } else {
            it->second = it->second + coeff;
            if (it->second.is_zero_constant()) terms_.erase(it);
        }
    }

    AdaptedForm operator+(const AdaptedForm& o) const {
        require_compatible(o);
        AdaptedForm r = *this;
        for (const auto& [m, c] : o.terms_) r.add(m, c);
        return r;
    }
    AdaptedForm operator-(const AdaptedForm& o) const {
        require_compatible(o);
        AdaptedForm r = *this;
        for (const auto& [m, c] : o.terms_) r.add(m, -c);
        return r;
    }
    AdaptedForm scaled(const Expr& f) const {
        AdaptedForm r(chart_, degree_);
        for (const auto& [m, c] : terms_) r.add(m, f * c);
        return r;
    }
    AdaptedForm operator-() const { return scaled(Expr::num(-1)); }

    /// Drops coefficients that are provably zero.
    AdaptedForm pruned(const SimplifyConfig& cfg = {}) const {
        AdaptedForm r(chart_, degree_);
        for (const auto& [m, c] : terms_)
            if (is_zero(c, cfg) != Verdict::ProvenZero) r.add(m, c);
        return r;
    }

    bool is_zero_form(const SimplifyConfig& cfg = {}) const {
        for (const auto& [m, c] : terms_)
            if (!verdict_zero(is_zero(c, cfg))) return false;
        return true;
    }

    void require_compatible(const AdaptedForm& o) const {
        if (chart_ != o.chart_ || degree_ != o.degree_)
            throw ChartError("forms of different chart or degree");
    }

private:
    ChartSpec chart_;
    int degree_ = 0;
    std::map<CobasisMask, Expr> terms_;
};

inline AdaptedForm wedge(const AdaptedForm& a, const AdaptedForm& b) {
    if (a.chart() != b.chart()) throw ChartError("wedge across charts");
    AdaptedForm r(a.chart(), a.degree() + b.degree());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            if (ma & mb) continue;
            int sign = detail::wedge_sign(ma, mb);
            r.add(ma | mb, sign > 0 ? ca * cb : -(ca * cb));
        }
    return r;
}

/// Exterior derivative: d(f e_S) = sum_i df/dq^i dq^i ^ e_S.
inline AdaptedForm exterior_derivative(const AdaptedForm& w) {
    const ChartSpec& chart = w.chart();
    AdaptedForm r(chart, w.degree() + 1);
    auto coords = chart.coordinates();
    for (const auto& [mask, coeff] : w.terms()) {
        for (std::size_t i = 0; i < coords.size(); ++i) {
            CobasisMask bit = CobasisMask(1) << i;
            if (mask & bit) continue;
            Expr dc = differentiate(coeff, coords[i]);
            if (dc.is_zero_constant()) continue;
            int sign = detail::wedge_sign(bit, mask);
            r.add(bit | mask, sign > 0 ? dc : -dc);
        }
    }
    return r;
}

/// Interior product i(X)w.
inline AdaptedForm contract(const AdaptedForm& w, const VectorField& x) {
    if (w.chart() != x.chart()) throw ChartError("contraction across charts");
    if (w.degree() == 0) return AdaptedForm(w.chart(), 0);
    AdaptedForm r(w.chart(), w.degree() - 1);
    for (const auto& [mask, coeff] : w.terms()) {
        for (CobasisMask mm = mask; mm; mm &= mm - 1) {
            int i = __builtin_ctzll(mm);
            const Expr& xi = x.component(static_cast<std::size_t>(i));
            if (xi.is_zero_constant()) continue;
            int pos = detail::bit_position(mask, i);
            Expr t = xi * coeff;
            r.add(mask & ~(CobasisMask(1) << i), pos % 2 == 0 ? t : -t);
        }
    }
    return r;
}

/// Cartan formula L_X = i(X) d + d i(X).
inline AdaptedForm lie_derivative(const AdaptedForm& w, const VectorField& x) {
    return contract(exterior_derivative(w), x) + exterior_derivative(contract(w, x));
}

/// d^m x = dx^1 ^ ... ^ dx^m.
inline AdaptedForm horizontal_volume(const ChartSpec& chart) {
    AdaptedForm f(chart, static_cast<int>(chart.m()));
    f.add((CobasisMask(1) << chart.m()) - 1, Expr::num(1));
    return f;
}

/// d^{m-1}x_mu = i(d/dx^mu) d^m x.
inline AdaptedForm horizontal_contracted(const ChartSpec& chart, std::size_t mu) {
    VectorField dxmu(chart);
    dxmu.set(mu, Expr::num(1));
    return contract(horizontal_volume(chart), dxmu);
}

/// Pullback along a coordinate map: coefficients get `bindings` substituted,
/// the cobasis 1-form dq^i is replaced by `differentials[i]`.
inline AdaptedForm pullback(const AdaptedForm& w, const Bindings& bindings,
                            const std::vector<AdaptedForm>& differentials) {
    AdaptedForm r(w.chart(), w.degree());
    for (const auto& [mask, coeff] : w.terms()) {
        AdaptedForm part = AdaptedForm::scalar(w.chart(), substitute(coeff, bindings));
        for (CobasisMask mm = mask; mm; mm &= mm - 1) {
            int i = __builtin_ctzll(mm);
            part = wedge(part, differentials[static_cast<std::size_t>(i)]);
        }
        r = r + part;
    }
    return r;
}

}  // namespace mvf
