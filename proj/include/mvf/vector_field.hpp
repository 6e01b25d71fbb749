#pragma once

// Vector fields on a chart and the Lie bracket.

#include "mvf/calculus.hpp"
#include "mvf/chart.hpp"

#include <string>
#include <vector>

namespace mvf {

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(ChartSpec chart)
        : chart_(std::move(chart)), components_(chart_.dim(), Expr::num(0)) {}

    const ChartSpec& chart() const { return chart_; }
    const std::vector<Expr>& components() const { return components_; }

    const Expr& component(std::size_t i) const { return components_[i]; }
    const Expr& component(const std::string& coord) const {
        int i = chart_.index_of(coord);
        if (i < 0) throw ChartError("no coordinate '" + coord + "' in chart");
        return components_[static_cast<std::size_t>(i)];
    }

    VectorField& set(const std::string& coord, Expr e) {
        int i = chart_.index_of(coord);
        if (i < 0) throw ChartError("no coordinate '" + coord + "' in chart");
        components_[static_cast<std::size_t>(i)] = std::move(e);
        return *this;
    }
    VectorField& set(std::size_t i, Expr e) {
        components_[i] = std::move(e);
        return *this;
    }

    /// Directional derivative Y(f).
    Expr apply(const Expr& f) const {
        std::vector<Expr> parts;
        auto coords = chart_.coordinates();
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (components_[i].is_zero_constant()) continue;
            parts.push_back(components_[i] * differentiate(f, coords[i]));
        }
        return Expr::sum(std::move(parts));
    }

    VectorField operator+(const VectorField& o) const {
        require_same_chart(o);
        VectorField r(chart_);
        for (std::size_t i = 0; i < components_.size(); ++i)
            r.components_[i] = components_[i] + o.components_[i];
        return r;
    }
    VectorField scaled(const Expr& f) const {
        VectorField r(chart_);
        for (std::size_t i = 0; i < components_.size(); ++i)
            r.components_[i] = f * components_[i];
        return r;
    }

    void require_same_chart(const VectorField& o) const {
        if (chart_ != o.chart_) throw ChartError("vector fields live on different charts");
    }

private:
    ChartSpec chart_;
    std::vector<Expr> components_;
};

/// [X,Y]^a = X(Y^a) - Y(X^a), componentwise, lightly normalized.
inline VectorField lie_bracket(const VectorField& x, const VectorField& y) {
    x.require_same_chart(y);
    VectorField r(x.chart());
    for (std::size_t a = 0; a < x.components().size(); ++a)
        r.set(a, x.apply(y.component(a)) - y.apply(x.component(a)));
    return r;
}

}  // namespace mvf
