#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace genshift {

enum class DomainKind { vertex, face, pixel, point };

std::string_view to_string(DomainKind kind);

/// Element-major matrix view used by the blur operators: one row per element,
/// one column per channel.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-element vector values attached to a domain.
///
/// Values are stored element-major: the channels of element `e` occupy
/// `values()[e * channels() .. (e + 1) * channels())`.
class Signal {
public:
    Signal() = default;
    Signal(DomainKind kind, std::size_t elements, std::size_t channels, double fill = 0.0);

    /// Throws ShapeError if `values.size() != elements * channels` and
    /// ValidationError if any value is not finite.
    Signal(DomainKind kind, std::size_t elements, std::size_t channels, std::vector<double> values);

    DomainKind kind() const { return kind_; }
    std::size_t size() const { return elements_; }
    std::size_t channels() const { return channels_; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    std::span<const double> operator[](std::size_t e) const
    {
        return {values_.data() + e * channels_, channels_};
    }
    std::span<double> operator[](std::size_t e) { return {values_.data() + e * channels_, channels_}; }

    double& at(std::size_t e, std::size_t c) { return values_[e * channels_ + c]; }
    double at(std::size_t e, std::size_t c) const { return values_[e * channels_ + c]; }

    Eigen::Map<const RowMatrix> matrix() const
    {
        return {values_.data(), static_cast<Eigen::Index>(elements_), static_cast<Eigen::Index>(channels_)};
    }
    Eigen::Map<RowMatrix> matrix()
    {
        return {values_.data(), static_cast<Eigen::Index>(elements_), static_cast<Eigen::Index>(channels_)};
    }

    /// Copies a dense element-by-channel matrix into a new signal.
    static Signal from_matrix(DomainKind kind, const Eigen::Ref<const RowMatrix>& m);

    /// Single channel copy.
    std::vector<double> channel(std::size_t c) const;

    bool operator==(const Signal&) const = default;

private:
    DomainKind kind_ = DomainKind::vertex;
    std::size_t elements_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> values_;
};

/// Throws ShapeError unless both signals have the same element count.
void require_same_elements(const Signal& a, const Signal& b, std::string_view context);

} // namespace genshift
