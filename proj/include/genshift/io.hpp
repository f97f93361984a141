#pragma once

#include "genshift/filters.hpp"
#include "genshift/mesh.hpp"
#include "genshift/signal.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace genshift::io {

// Each format has a string-level parser/formatter and path-level wrappers.
// Writers are deterministic and locale independent; path writers write to a
// temporary file in the target directory and rename it on success.

TriangleMesh parse_obj(std::string_view text);
std::string format_obj(const TriangleMesh& mesh);
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

TriangleMesh parse_ply(std::string_view text);
std::string format_ply(const TriangleMesh& mesh);
TriangleMesh read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh);

/// Dispatches on the extension (.obj or .ply).
TriangleMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

/// A decoded PGM (1 channel) or PPM (3 channels) image with values in [0, 1].
struct Image {
    GridDomain grid;
    Signal pixels;
};

enum class NetpbmEncoding { plain, raw };

Image parse_netpbm(std::string_view bytes);
/// Values are clamped to [0, 1] and rounded to 8 bits.
std::string format_netpbm(const Image& image, NetpbmEncoding encoding = NetpbmEncoding::raw);
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image, NetpbmEncoding encoding = NetpbmEncoding::raw);

/// `x y z nx ny nz` per line. Normals within 10% of unit length are
/// renormalized (counted in `renormalized`), others rejected.
struct CloudParse {
    OrientedPointCloud cloud;
    std::size_t renormalized = 0;
};
CloudParse parse_xyzn(std::string_view text);
std::string format_xyzn(const OrientedPointCloud& cloud);
CloudParse read_xyzn(const std::filesystem::path& path);
void write_xyzn(const std::filesystem::path& path, const OrientedPointCloud& cloud);

/// Header `element,bin_0,...,bin_{m-1}`, one row per element, 6 significant digits.
std::string format_histograms_csv(const HistogramField& field);
void write_histograms_csv(const std::filesystem::path& path, const HistogramField& field);

/// Per-element signal table. The writer emits `element,c0,...` with 17
/// significant digits (bit-exact round trip); the reader also accepts plain
/// comma-separated rows without header or index column.
Signal parse_signal_csv(std::string_view text, DomainKind kind);
std::string format_signal_csv(const Signal& signal);
Signal read_signal_csv(const std::filesystem::path& path, DomainKind kind);
void write_signal_csv(const std::filesystem::path& path, const Signal& signal);

std::string read_file(const std::filesystem::path& path);
/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Locale-independent shortest formatting with `digits` significant digits.
std::string format_real(double value, int digits);

} // namespace genshift::io
