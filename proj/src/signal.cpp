#include "genshift/signal.hpp"

#include "genshift/errors.hpp"

#include <cmath>
#include <string>

namespace genshift {

std::string_view to_string(DomainKind kind)
{
    switch (kind) {
    case DomainKind::vertex: return "vertex";
    case DomainKind::face: return "face";
    case DomainKind::pixel: return "pixel";
    case DomainKind::point: return "point";
    }
    return "unknown";
}

Signal::Signal(DomainKind kind, std::size_t elements, std::size_t channels, double fill)
    : kind_(kind), elements_(elements), channels_(channels), values_(elements * channels, fill)
{}

Signal::Signal(DomainKind kind, std::size_t elements, std::size_t channels, std::vector<double> values)
    : kind_(kind), elements_(elements), channels_(channels), values_(std::move(values))
{
    if (values_.size() != elements_ * channels_) {
        throw ShapeError("signal value count " + std::to_string(values_.size()) + " != " +
                         std::to_string(elements_) + " elements x " + std::to_string(channels_) + " channels");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ValidationError("non-finite signal value at element " + std::to_string(i / channels_));
        }
    }
}

Signal Signal::from_matrix(DomainKind kind, const Eigen::Ref<const RowMatrix>& m)
{
    Signal s(kind, static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    s.matrix() = m;
    return s;
}

std::vector<double> Signal::channel(std::size_t c) const
{
    std::vector<double> out(elements_);
    for (std::size_t e = 0; e < elements_; ++e) out[e] = at(e, c);
    return out;
}

void require_same_elements(const Signal& a, const Signal& b, std::string_view context)
{
    if (a.size() != b.size()) {
        throw ShapeError(std::string(context) + ": element counts differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    }
}

} // namespace genshift
