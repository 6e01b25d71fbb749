#pragma once

// Adapted coordinate charts on a fibred manifold E -> M and its first jet
// bundle: base coordinates x^mu, fiber coordinates y^A and, on jet charts,
// the induced jet coordinates v^A_mu.

#include "mvf/expr.hpp"

#include <set>
#include <string>
#include <vector>

namespace mvf {

class ChartSpec {
public:
    ChartSpec() = default;

    /// Chart on E (no jet coordinates).
    ChartSpec(std::vector<std::string> base, std::vector<std::string> fiber)
        : base_(std::move(base)), fiber_(std::move(fiber)) {
        validate();
    }

    /// Jet chart with explicit jet coordinate names (row-major: A, then mu).
    ChartSpec(std::vector<std::string> base, std::vector<std::string> fiber,
              std::vector<std::string> jet)
        : base_(std::move(base)), fiber_(std::move(fiber)), jet_(std::move(jet)) {
        validate();
    }

    /// Jet chart with auto-generated names v<A>_<mu> (1-based indices).
    static ChartSpec jet_chart(std::vector<std::string> base, std::vector<std::string> fiber) {
        std::vector<std::string> jet;
        for (std::size_t a = 1; a <= fiber.size(); ++a)
            for (std::size_t mu = 1; mu <= base.size(); ++mu)
                jet.push_back("v" + std::to_string(a) + "_" + std::to_string(mu));
        return ChartSpec(std::move(base), std::move(fiber), std::move(jet));
    }

    std::size_t m() const { return base_.size(); }
    std::size_t fiber_dim() const { return fiber_.size(); }  // N
    bool has_jet() const { return !jet_.empty(); }
    std::size_t dim() const { return base_.size() + fiber_.size() + jet_.size(); }

    const std::vector<std::string>& base() const { return base_; }
    const std::vector<std::string>& fiber() const { return fiber_; }
    const std::vector<std::string>& jet() const { return jet_; }

    const std::string& jet_name(std::size_t a, std::size_t mu) const {
        return jet_[a * m() + mu];
    }
    std::size_t jet_index(std::size_t a, std::size_t mu) const {
        return base_.size() + fiber_.size() + a * m() + mu;
    }

    /// All coordinates in canonical order: base, fiber, jet.
    std::vector<std::string> coordinates() const {
        std::vector<std::string> out = base_;
        out.insert(out.end(), fiber_.begin(), fiber_.end());
        out.insert(out.end(), jet_.begin(), jet_.end());
        return out;
    }

    std::set<std::string> coordinate_set() const {
        auto c = coordinates();
        return {c.begin(), c.end()};
    }

    /// Index in coordinates(); -1 when absent.
    int index_of(const std::string& name) const {
        int i = 0;
        for (const auto& n : base_) {
            if (n == name) return i;
            ++i;
        }
        for (const auto& n : fiber_) {
            if (n == name) return i;
            ++i;
        }
        for (const auto& n : jet_) {
            if (n == name) return i;
            ++i;
        }
        return -1;
    }

    bool is_base_index(std::size_t i) const { return i < base_.size(); }

    bool operator==(const ChartSpec& o) const {
        return base_ == o.base_ && fiber_ == o.fiber_ && jet_ == o.jet_;
    }
    bool operator!=(const ChartSpec& o) const { return !(*this == o); }

    /// Chart on E obtained by forgetting the jet coordinates.
    ChartSpec base_chart() const { return ChartSpec(base_, fiber_); }

private:
    void validate() const {
        if (base_.empty() || fiber_.empty())
            throw ChartError("chart needs at least one base and one fiber coordinate");
        std::set<std::string> seen;
        for (const auto& n : coordinates()) {
            if (n.empty()) throw ChartError("empty coordinate name");
            if (!seen.insert(n).second) throw ChartError("duplicate coordinate name '" + n + "'");
        }
        if (!jet_.empty() && jet_.size() != base_.size() * fiber_.size())
            throw ChartError("jet coordinate count must be m*N");
    }

    std::vector<std::string> base_;
    std::vector<std::string> fiber_;
    std::vector<std::string> jet_;
};

}  // namespace mvf
