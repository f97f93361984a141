#include "genshift/filters.hpp"

#include "genshift/errors.hpp"
#include "genshift/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace genshift {

namespace {

constexpr std::size_t kMinBatch = 16;

// Partition weights phi_i(guide(x)) for every element in CSR layout, entries
// ascending by sample within each element.
struct PartitionTable {
    std::vector<std::size_t> offsets;
    std::vector<PartitionEntry> entries;

    std::span<const PartitionEntry> row(std::size_t e) const
    {
        return {entries.data() + offsets[e], offsets[e + 1] - offsets[e]};
    }

    // Samples referenced by at least one element, ascending.
    std::vector<std::uint32_t> used_samples(std::size_t sample_count) const
    {
        std::vector<char> used(sample_count, 0);
        for (const auto& e : entries) used[e.sample] = 1;
        std::vector<std::uint32_t> out;
        for (std::size_t i = 0; i < sample_count; ++i) {
            if (used[i]) out.push_back(static_cast<std::uint32_t>(i));
        }
        return out;
    }
};

PartitionTable build_partition_table(const RangeSpace& range, const Signal& guide)
{
    PartitionTable table;
    table.offsets.reserve(guide.size() + 1);
    table.offsets.push_back(0);
    std::vector<PartitionEntry> row;
    for (std::size_t e = 0; e < guide.size(); ++e) {
        range.partition(guide[e], row);
        table.entries.insert(table.entries.end(), row.begin(), row.end());
        table.offsets.push_back(table.entries.size());
    }
    return table;
}

// Copy of `guide` moved onto the range manifold.
Signal project_guide(const RangeSpace& range, const Signal& guide, std::size_t& clamped)
{
    if (guide.channels() != range.dimension()) {
        throw ShapeError("guide signal has " + std::to_string(guide.channels()) + " channels but the range has dimension " +
                         std::to_string(range.dimension()));
    }
    Signal out = guide;
    for (std::size_t e = 0; e < out.size(); ++e) {
        if (range.project(out[e])) ++clamped;
    }
    return out;
}

// Blurred weight signals T[f1 K(p_i, guide)] and T[K(p_i, guide)] per sample,
// computed on demand in parallel and cached. Each sample's result depends
// only on the sample, so the cache contents do not depend on thread count.
class SampleBlurCache {
public:
    SampleBlurCache(const FilterParams& params, const Signal* values, const Signal& guide, bool with_denominator)
        : params_(params), values_(values), guide_(guide), with_denominator_(with_denominator),
          slots_(params.range.sample_count())
    {}

    void ensure(std::span<const std::uint32_t> samples)
    {
        std::vector<std::uint32_t> missing;
        for (std::uint32_t s : samples) {
            if (!slots_[s]) missing.push_back(s);
        }
        parallel_for(missing.size(), params_.threads, [&](std::size_t k) {
            slots_[missing[k]] = compute(missing[k]);
        });
        computed_ += missing.size();
    }

    void release(std::span<const std::uint32_t> samples)
    {
        for (std::uint32_t s : samples) slots_[s].reset();
    }

    const RowMatrix& get(std::uint32_t s) const { return *slots_[s]; }
    std::size_t computed() const { return computed_; }

    // Columns of the cached matrices: value channels, then the denominator.
    std::size_t value_channels() const { return values_ ? values_->channels() : 0; }

private:
    RowMatrix compute(std::uint32_t s) const
    {
        const std::size_t n = guide_.size();
        const std::size_t nv = value_channels();
        const std::size_t cols = nv + (with_denominator_ ? 1 : 0);
        const auto sample = params_.range.sample(s);
        const RangeKernel& kernel = params_.range.kernel();
        RowMatrix weighted(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
        for (std::size_t e = 0; e < n; ++e) {
            const double k = kernel(sample, guide_[e]);
            for (std::size_t c = 0; c < nv; ++c) weighted(e, c) = k * values_->at(e, c);
            if (with_denominator_) weighted(e, nv) = k;
        }
        return params_.blur->apply(weighted);
    }

    const FilterParams& params_;
    const Signal* values_;
    const Signal& guide_;
    bool with_denominator_;
    std::vector<std::optional<RowMatrix>> slots_;
    std::size_t computed_ = 0;
};

// Accumulates sum_i phi_i(x) * blurred_i(x) over the samples of `table` that
// lie in [lo, hi], continuing from `cursor`. Entries are visited in ascending
// sample order, so totals are independent of how samples were batched.
void accumulate(const PartitionTable& table, const SampleBlurCache& cache, std::uint32_t lo, std::uint32_t hi,
                std::vector<std::size_t>& cursor, RowMatrix& totals)
{
    const Eigen::Index cols = totals.cols();
    for (std::size_t e = 0; e + 1 < table.offsets.size(); ++e) {
        std::size_t& k = cursor[e];
        const std::size_t end = table.offsets[e + 1];
        while (k < end && table.entries[k].sample <= hi) {
            const PartitionEntry& entry = table.entries[k];
            if (entry.sample >= lo) {
                const RowMatrix& blurred = cache.get(entry.sample);
                for (Eigen::Index c = 0; c < cols; ++c) totals(e, c) += entry.weight * blurred(e, c);
            }
            ++k;
        }
    }
}

RowMatrix accumulate_all(const PartitionTable& table, SampleBlurCache& cache, std::size_t elements,
                         std::size_t sample_count, std::size_t cols)
{
    const auto used = table.used_samples(sample_count);
    cache.ensure(used);
    RowMatrix totals = RowMatrix::Zero(static_cast<Eigen::Index>(elements), static_cast<Eigen::Index>(cols));
    std::vector<std::size_t> cursor(table.offsets.begin(), table.offsets.end() - 1);
    if (!used.empty()) accumulate(table, cache, used.front(), used.back(), cursor, totals);
    return totals;
}

double max_column(const RowMatrix& m, Eigen::Index col)
{
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < m.rows(); ++r) best = std::max(best, m(r, col));
    return best;
}

void check_blur(const FilterParams& params, std::size_t elements)
{
    params.validate();
    if (params.blur->size() != elements) {
        throw ShapeError("blur operator has " + std::to_string(params.blur->size()) + " elements, signal has " +
                         std::to_string(elements));
    }
}

double angle_between(std::span<const double> a, std::span<const double> b)
{
    const Eigen::Vector3d u(a[0], a[1], a[2]);
    const Eigen::Vector3d v(b[0], b[1], b[2]);
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

} // namespace

void FilterParams::validate() const
{
    if (!blur) throw ParameterError("filter parameters need a blur operator");
    if (!(tolerance > 0.0)) throw ParameterError("mean-shift tolerance must be > 0");
    if (!(denominator_floor > 0.0)) throw ParameterError("denominator floor must be > 0");
    if (max_iterations < 1) throw ParameterError("max iterations must be >= 1");
    range.kernel().validate();
}

BilateralResult generalized_bilateral(const Signal& f1, const Signal& f2, const FilterParams& params)
{
    require_same_elements(f1, f2, "generalized_bilateral");
    check_blur(params, f1.size());

    using Clock = std::chrono::steady_clock;
    auto seconds_since = [](Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); };
    auto mark = Clock::now();

    BilateralResult result;
    const Signal guide = project_guide(params.range, f2, result.clamped_count);
    const PartitionTable table = build_partition_table(params.range, guide);
    const auto used = table.used_samples(params.range.sample_count());
    result.partition_seconds = seconds_since(mark);

    const std::size_t n = f1.channels();
    SampleBlurCache cache(params, &f1, guide, true);
    RowMatrix totals = RowMatrix::Zero(static_cast<Eigen::Index>(f1.size()), static_cast<Eigen::Index>(n + 1));
    std::vector<std::size_t> cursor(table.offsets.begin(), table.offsets.end() - 1);

    // Stream the samples in batches so only a batch of blurred signals is alive.
    const std::size_t batch = std::max(kMinBatch, 2 * resolve_threads(params.threads));
    for (std::size_t start = 0; start < used.size(); start += batch) {
        const std::span<const std::uint32_t> chunk(used.data() + start, std::min(batch, used.size() - start));
        mark = Clock::now();
        cache.ensure(chunk);
        result.blur_seconds += seconds_since(mark);
        mark = Clock::now();
        accumulate(table, cache, chunk.front(), chunk.back(), cursor, totals);
        cache.release(chunk);
        result.accumulate_seconds += seconds_since(mark);
    }
    result.samples_blurred = cache.computed();
    mark = Clock::now();

    const double floor = params.denominator_floor * max_column(totals, static_cast<Eigen::Index>(n));
    result.output = Signal(f1.kind(), f1.size(), n);
    for (std::size_t e = 0; e < f1.size(); ++e) {
        const double den = totals(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(n));
        if (!(den >= floor) || !(den > 0.0)) {
            ++result.fallback_count;
            for (std::size_t c = 0; c < n; ++c) result.output.at(e, c) = f1.at(e, c);
            continue;
        }
        for (std::size_t c = 0; c < n; ++c) {
            result.output.at(e, c) = totals(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(c)) / den;
        }
    }
    result.accumulate_seconds += seconds_since(mark);
    return result;
}

MeanShiftResult mean_shift_euclidean(const Signal& f, const FilterParams& params)
{
    check_blur(params, f.size());
    if (params.range.manifold() == RangeManifold::sphere) {
        throw ParameterError("mean_shift_euclidean needs an interval or box range");
    }
    MeanShiftResult result;
    const Signal original = project_guide(params.range, f, result.clamped_count);
    const std::size_t n = original.channels();
    SampleBlurCache cache(params, &original, original, true);

    Signal current = original;
    for (int it = 1; it <= params.max_iterations; ++it) {
        const PartitionTable table = build_partition_table(params.range, current);
        const RowMatrix totals = accumulate_all(table, cache, f.size(), params.range.sample_count(), n + 1);
        const double floor = params.denominator_floor * max_column(totals, static_cast<Eigen::Index>(n));

        Signal next = current;
        double change = 0.0;
        for (std::size_t e = 0; e < f.size(); ++e) {
            const double den = totals(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(n));
            if (!(den >= floor) || !(den > 0.0)) {
                ++result.degenerate_count;
                continue;
            }
            auto row = next[e];
            for (std::size_t c = 0; c < n; ++c) {
                row[c] = totals(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(c)) / den;
            }
            params.range.project(row);
            for (std::size_t c = 0; c < n; ++c) change = std::max(change, std::abs(row[c] - current.at(e, c)));
        }
        current = std::move(next);
        result.iterations = it;
        result.changes.push_back(change);
        if (change <= params.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.output = std::move(current);
    return result;
}

MeanShiftResult mean_shift_spherical(const Signal& f, const FilterParams& params)
{
    check_blur(params, f.size());
    if (params.range.manifold() != RangeManifold::sphere ||
        params.range.kernel().kind != KernelKind::von_mises_fisher) {
        throw ParameterError("mean_shift_spherical needs a sphere range with a von Mises-Fisher kernel");
    }
    MeanShiftResult result;
    const Signal original = project_guide(params.range, f, result.clamped_count);
    SampleBlurCache cache(params, &original, original, false);

    Signal current = original;
    for (int it = 1; it <= params.max_iterations; ++it) {
        const PartitionTable table = build_partition_table(params.range, current);
        const RowMatrix totals = accumulate_all(table, cache, f.size(), params.range.sample_count(), 3);

        double max_norm = 0.0;
        for (Eigen::Index e = 0; e < totals.rows(); ++e) max_norm = std::max(max_norm, totals.row(e).norm());
        const double floor = params.denominator_floor * max_norm;

        Signal next = current;
        double change = 0.0;
        for (std::size_t e = 0; e < f.size(); ++e) {
            const double norm = totals.row(static_cast<Eigen::Index>(e)).norm();
            if (!(norm > floor)) {
                ++result.degenerate_count;
                continue;
            }
            auto row = next[e];
            for (std::size_t c = 0; c < 3; ++c) row[c] = totals(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(c)) / norm;
            change = std::max(change, angle_between(row, current[e]));
        }
        current = std::move(next);
        result.iterations = it;
        result.changes.push_back(change);
        if (change <= params.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.output = std::move(current);
    return result;
}

HistogramField::HistogramField(std::size_t elements, std::size_t bins, std::vector<double> mass)
    : elements_(elements), bins_(bins), mass_(std::move(mass))
{
    if (mass_.size() != elements * bins) throw ShapeError("histogram field size mismatch");
}

HistogramField local_histograms(const Signal& f, const FilterParams& params)
{
    check_blur(params, f.size());
    std::size_t clamped = 0;
    const Signal guide = project_guide(params.range, f, clamped);
    const std::size_t m = params.range.sample_count();
    const auto weights = params.range.quadrature_weights();

    SampleBlurCache cache(params, nullptr, guide, true);
    std::vector<double> mass(f.size() * m, 0.0);
    std::vector<std::uint32_t> all(m);
    for (std::size_t i = 0; i < m; ++i) all[i] = static_cast<std::uint32_t>(i);

    const std::size_t batch = std::max(kMinBatch, 2 * resolve_threads(params.threads));
    for (std::size_t start = 0; start < m; start += batch) {
        const std::span<const std::uint32_t> chunk(all.data() + start, std::min(batch, m - start));
        cache.ensure(chunk);
        for (std::uint32_t s : chunk) {
            const RowMatrix& blurred = cache.get(s);
            for (std::size_t e = 0; e < f.size(); ++e) mass[e * m + s] = weights[s] * blurred(static_cast<Eigen::Index>(e), 0);
        }
        cache.release(chunk);
    }

    std::size_t fallbacks = 0;
    for (std::size_t e = 0; e < f.size(); ++e) {
        double* row = mass.data() + e * m;
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += row[i];
        if (!(sum > 0.0) || !std::isfinite(sum)) {
            ++fallbacks;
            std::fill(row, row + m, 1.0 / static_cast<double>(m));
            continue;
        }
        for (std::size_t i = 0; i < m; ++i) row[i] /= sum;
    }
    HistogramField field(f.size(), m, std::move(mass));
    field.uniform_fallbacks = fallbacks;
    return field;
}

Signal exact_bilateral_oracle(const Signal& f1, const Signal& f2, const Eigen::MatrixXd& spatial_kernel,
                              std::span<const double> quadrature_weights, const RangeKernel& kernel)
{
    require_same_elements(f1, f2, "exact_bilateral_oracle");
    const std::size_t n = f1.size();
    if (n > 5000) throw ParameterError("exact oracle refused for " + std::to_string(n) + " > 5000 elements");
    if (static_cast<std::size_t>(spatial_kernel.rows()) != n || static_cast<std::size_t>(spatial_kernel.cols()) != n ||
        quadrature_weights.size() != n) {
        throw ShapeError("exact oracle: kernel matrix or weights do not match the signals");
    }
    kernel.validate();
    Signal out(f1.kind(), n, f1.channels());
    std::vector<double> num(f1.channels());
    for (std::size_t x = 0; x < n; ++x) {
        std::fill(num.begin(), num.end(), 0.0);
        double den = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            const double spatial = spatial_kernel(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
            if (spatial == 0.0) continue;
            const double w = spatial * quadrature_weights[y] * kernel(f2[x], f2[y]);
            for (std::size_t c = 0; c < num.size(); ++c) num[c] += w * f1.at(y, c);
            den += w;
        }
        for (std::size_t c = 0; c < num.size(); ++c) out.at(x, c) = den != 0.0 ? num[c] / den : f1.at(x, c);
    }
    return out;
}

Signal exact_grid_bilateral_oracle(const GridDomain& grid, const Signal& f1, const Signal& f2, double sigma_pixels,
                                   const RangeKernel& kernel)
{
    require_same_elements(f1, f2, "exact_grid_bilateral_oracle");
    if (f1.size() != grid.size()) throw ShapeError("grid oracle: signal does not match the grid");
    if (!(sigma_pixels > 0.0)) throw ParameterError("grid oracle needs sigma > 0");
    kernel.validate();
    const long radius = static_cast<long>(std::ceil(3.0 * sigma_pixels));
    const auto w = static_cast<long>(grid.width);
    const auto h = static_cast<long>(grid.height);
    Signal out(f1.kind(), f1.size(), f1.channels());
    std::vector<double> num(f1.channels());
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            const auto center = static_cast<std::size_t>(y * w + x);
            std::fill(num.begin(), num.end(), 0.0);
            double den = 0.0;
            for (long dy = -radius; dy <= radius; ++dy) {
                const long yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                for (long dx = -radius; dx <= radius; ++dx) {
                    const long xx = x + dx;
                    if (xx < 0 || xx >= w) continue;
                    const auto other = static_cast<std::size_t>(yy * w + xx);
                    const double spatial =
                        std::exp(-0.5 * static_cast<double>(dx * dx + dy * dy) / (sigma_pixels * sigma_pixels));
                    const double wgt = spatial * kernel(f2[center], f2[other]);
                    for (std::size_t c = 0; c < num.size(); ++c) num[c] += wgt * f1.at(other, c);
                    den += wgt;
                }
            }
            for (std::size_t c = 0; c < num.size(); ++c) out.at(center, c) = num[c] / den;
        }
    }
    return out;
}

Eigen::MatrixXd spatial_kernel_matrix(const BlurOperator& blur)
{
    Eigen::MatrixXd m = dense_blur_matrix(blur);
    const auto w = blur.quadrature_weights();
    for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) /= w[static_cast<std::size_t>(j)];
    return m;
}

} // namespace genshift
