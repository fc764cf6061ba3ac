#include "pathvar/drift.hpp"

#include "pathvar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pathvar {

DriftSpec::DriftSpec(OpenLoop v) : v_(std::move(v)) {}

DriftSpec::DriftSpec(Constant v) : v_(std::move(v)) {
    const auto& c = std::get<Constant>(v_).value;
    if (c.empty()) throw InvalidArgument("DriftSpec: constant drift needs a positive dimension");
    for (double x : c)
        if (!std::isfinite(x)) throw InvalidArgument("DriftSpec: non-finite constant drift");
}

DriftSpec::DriftSpec(ClosedLoop v) : v_(std::move(v)) {
    const auto& c = std::get<ClosedLoop>(v_);
    if (c.dim == 0) throw InvalidArgument("DriftSpec: closed-loop drift needs a positive dimension");
    if (c.basis.size() != c.weights.size())
        throw InvalidArgument("DriftSpec: closed-loop basis and weights differ in length");
}

DriftSpec::DriftSpec(Retarded v) : v_(std::move(v)) {
    const auto& r = std::get<Retarded>(v_);
    if (!r.inner) throw InvalidArgument("DriftSpec: retarded drift without inner drift");
    if (!(r.lag > 0.0 && r.lag <= 1.0))
        throw InvalidArgument("DriftSpec: retardation lag must lie in (0, 1]");
}

DriftSpec::DriftSpec(Clipped v) : v_(std::move(v)) {
    const auto& c = std::get<Clipped>(v_);
    if (!c.inner) throw InvalidArgument("DriftSpec: clipped drift without inner drift");
    if (!(c.bound > 0.0)) throw InvalidArgument("DriftSpec: clip bound must be positive");
}

DriftSpec DriftSpec::zero(std::size_t dim) { return constant(dim, 0.0); }

DriftSpec DriftSpec::constant(std::size_t dim, double value) {
    return DriftSpec(Constant{std::vector<double>(dim, value)});
}

DriftSpec DriftSpec::open_loop(CameronMartinDrift density) {
    return DriftSpec(OpenLoop{std::move(density)});
}

std::size_t DriftSpec::dim() const noexcept {
    return std::visit(
        [](const auto& v) -> std::size_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OpenLoop>) return v.density.dim();
            else if constexpr (std::is_same_v<T, Constant>) return v.value.size();
            else if constexpr (std::is_same_v<T, ClosedLoop>) return v.dim;
            else return v.inner->dim();
        },
        v_);
}

bool DriftSpec::is_deterministic() const noexcept {
    return std::visit(
        [](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OpenLoop> || std::is_same_v<T, Constant>) return true;
            else if constexpr (std::is_same_v<T, ClosedLoop>) return v.basis.empty();
            else return v.inner->is_deterministic();
        },
        v_);
}

DriftSpec clip_drift(DriftSpec u, double bound) {
    return DriftSpec(DriftSpec::Clipped{std::make_shared<const DriftSpec>(std::move(u)), bound});
}

DriftSpec retard_drift(DriftSpec u, double lag) {
    return DriftSpec(DriftSpec::Retarded{std::make_shared<const DriftSpec>(std::move(u)), lag});
}

DriftSpec affine_feedback(std::size_t dim, double slope, double offset, FeedbackPoint point) {
    DriftSpec::ClosedLoop c{dim, {}, {slope, offset}, point};
    c.basis.emplace_back([](const FeedbackInput& in, std::span<double> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in.state[i];
    });
    c.basis.emplace_back([](const FeedbackInput&, std::span<double> out) {
        std::fill(out.begin(), out.end(), 1.0);
    });
    return DriftSpec(std::move(c));
}

DriftSpec affine_feedback_cells(std::vector<double> slope, std::vector<double> offset,
                                FeedbackPoint point) {
    if (slope.size() != offset.size())
        throw InvalidArgument("affine_feedback_cells: slope and offset differ in length");
    DriftSpec::ClosedLoop c{1, {}, {1.0, 1.0}, point};
    c.basis.emplace_back([a = std::move(slope)](const FeedbackInput& in, std::span<double> out) {
        if (in.cell >= a.size()) throw InvalidArgument("affine_feedback_cells: grid mismatch");
        out[0] = a[in.cell] * in.state[0];
    });
    c.basis.emplace_back([b = std::move(offset)](const FeedbackInput& in, std::span<double> out) {
        if (in.cell >= b.size()) throw InvalidArgument("affine_feedback_cells: grid mismatch");
        out[0] = b[in.cell];
    });
    return DriftSpec(std::move(c));
}

// ----------------------------------------------------------------------------

struct DriftRealizer::Node {
    enum class Kind { open_loop, constant, closed_loop, retarded, clipped } kind;
    const DriftSpec* spec = nullptr;
    std::size_t child = 0;
    std::size_t lag_cells = 0;
    double bound = 0.0;
    std::vector<double> history;  // retarded: inner density per cell
    std::vector<double> scratch;  // closed loop: basis output
};

DriftRealizer::DriftRealizer(const DriftSpec& spec, const TimeGrid& grid)
    : grid_(grid), dim_(spec.dim()) {
    compile(spec);
}

DriftRealizer::~DriftRealizer() = default;
DriftRealizer::DriftRealizer(DriftRealizer&&) noexcept = default;
DriftRealizer& DriftRealizer::operator=(DriftRealizer&&) noexcept = default;

std::size_t DriftRealizer::compile(const DriftSpec& spec) {
    const std::size_t idx = nodes_.size();
    nodes_.push_back(Node{});
    nodes_[idx].spec = &spec;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DriftSpec::OpenLoop>) {
                if (!(v.density.grid() == grid_))
                    throw InvalidArgument("drift: open-loop density defined on a different grid");
                nodes_[idx].kind = Node::Kind::open_loop;
            } else if constexpr (std::is_same_v<T, DriftSpec::Constant>) {
                nodes_[idx].kind = Node::Kind::constant;
            } else if constexpr (std::is_same_v<T, DriftSpec::ClosedLoop>) {
                nodes_[idx].kind = Node::Kind::closed_loop;
                nodes_[idx].scratch.assign(v.dim, 0.0);
            } else if constexpr (std::is_same_v<T, DriftSpec::Retarded>) {
                const double cells = v.lag * static_cast<double>(grid_.steps());
                const double rounded = std::round(cells);
                if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells) || rounded < 1.0)
                    throw InvalidArgument("retard_drift: lag is not a multiple of the grid step");
                const std::size_t child = compile(*v.inner);
                nodes_[idx].kind = Node::Kind::retarded;
                nodes_[idx].child = child;
                nodes_[idx].lag_cells = static_cast<std::size_t>(rounded);
                nodes_[idx].history.assign(grid_.steps() * v.inner->dim(), 0.0);
            } else {
                const std::size_t child = compile(*v.inner);
                nodes_[idx].kind = Node::Kind::clipped;
                nodes_[idx].child = child;
                nodes_[idx].bound = v.bound;
            }
        },
        spec.variant());
    return idx;
}

void DriftRealizer::next(std::size_t cell, std::span<const double> base_state,
                         std::span<const double> controlled_state, std::span<double> out) {
    if (cell >= grid_.steps()) throw InvalidArgument("DriftRealizer: cell beyond grid");
    if (out.size() != dim_) throw InvalidArgument("DriftRealizer: output dimension mismatch");
    eval(0, cell, base_state, controlled_state, out);
}

void DriftRealizer::eval(std::size_t idx, std::size_t cell, std::span<const double> base_state,
                         std::span<const double> controlled_state, std::span<double> out) {
    Node& node = nodes_[idx];
    switch (node.kind) {
    case Node::Kind::open_loop: {
        const auto c = std::get<DriftSpec::OpenLoop>(node.spec->variant()).density.cell(cell);
        std::copy(c.begin(), c.end(), out.begin());
        return;
    }
    case Node::Kind::constant: {
        const auto& c = std::get<DriftSpec::Constant>(node.spec->variant()).value;
        std::copy(c.begin(), c.end(), out.begin());
        return;
    }
    case Node::Kind::closed_loop: {
        const auto& c = std::get<DriftSpec::ClosedLoop>(node.spec->variant());
        const FeedbackInput in{cell, grid_.time(cell),
                               c.point == FeedbackPoint::controlled ? controlled_state : base_state};
        if (in.state.size() < c.dim)
            throw InvalidArgument("closed-loop drift: state has fewer components than the drift");
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t b = 0; b < c.basis.size(); ++b) {
            c.basis[b](in, node.scratch);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += c.weights[b] * node.scratch[i];
        }
        return;
    }
    case Node::Kind::retarded: {
        const std::size_t d = out.size();
        std::span<double> slot(node.history.data() + cell * d, d);
        eval(node.child, cell, base_state, controlled_state, slot);
        if (cell < node.lag_cells) {
            std::fill(out.begin(), out.end(), 0.0);
        } else {
            const double* src = node.history.data() + (cell - node.lag_cells) * d;
            std::copy(src, src + d, out.begin());
        }
        return;
    }
    case Node::Kind::clipped: {
        eval(node.child, cell, base_state, controlled_state, out);
        for (double& v : out) v = std::clamp(v, -node.bound, node.bound);
        return;
    }
    }
}

}  // namespace pathvar
