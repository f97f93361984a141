#include "genshift/io.hpp"

#include "genshift/errors.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

namespace genshift::io {

namespace {

// Splits text into lines (handles \n and \r\n), keeping 1-based numbering.
std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

std::vector<std::string_view> tokens(std::string_view line, char extra_separator = '\0')
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_sep = [&](char c) { return c == ' ' || c == '\t' || c == '\r' || (extra_separator && c == extra_separator); };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_sep(line[j])) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view token, std::size_t line)
{
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError("expected a finite number, got '" + std::string(token) + "'", line);
    }
    return value;
}

long long parse_integer(std::string_view token, std::size_t line)
{
    long long value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError("expected an integer, got '" + std::string(token) + "'", line);
    return value;
}

void append_fan(std::vector<Face>& faces, const std::vector<std::size_t>& polygon)
{
    for (std::size_t k = 1; k + 1 < polygon.size(); ++k) faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
}

std::string mesh_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

} // namespace

std::string format_real(double value, int digits)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, digits);
    if (ec != std::errc()) throw Error("number formatting failed");
    std::string out(buffer, ptr);
    if (out == "-0") out = "0";
    return out;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    static std::atomic<unsigned> counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.close();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error("failed writing '" + path.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error("cannot move output into place at '" + path.string() + "': " + ec.message());
    }
}

TriangleMesh parse_obj(std::string_view text)
{
    std::vector<Vec3> positions;
    std::vector<Face> faces;
    const auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        const auto tok = tokens(lines[ln]);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (tok[0] == "v") {
            if (tok.size() < 4) throw ParseError("vertex needs three coordinates", line_no);
            positions.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                   parse_double(tok[3], line_no));
        } else if (tok[0] == "f") {
            if (tok.size() < 4) throw ParseError("face needs at least three vertices", line_no);
            std::vector<std::size_t> polygon;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string_view index_token = tok[k].substr(0, tok[k].find('/'));
                const long long raw = parse_integer(index_token, line_no);
                const long long count = static_cast<long long>(positions.size());
                const long long index = raw > 0 ? raw - 1 : count + raw;
                if (raw == 0 || index < 0 || index >= count) {
                    throw ParseError("face index " + std::to_string(raw) + " out of range", line_no);
                }
                polygon.push_back(static_cast<std::size_t>(index));
            }
            append_fan(faces, polygon);
        }
    }
    return TriangleMesh(std::move(positions), std::move(faces));
}

std::string format_obj(const TriangleMesh& mesh)
{
    std::string out;
    out.reserve(mesh.vertex_count() * 40 + mesh.face_count() * 24);
    for (const Vec3& p : mesh.positions()) {
        out += "v " + format_real(p.x(), 9) + ' ' + format_real(p.y(), 9) + ' ' + format_real(p.z(), 9) + '\n';
    }
    for (const Face& f : mesh.faces()) {
        out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' + std::to_string(f[2] + 1) + '\n';
    }
    return out;
}

TriangleMesh read_obj(const std::filesystem::path& path) { return parse_obj(read_file(path)); }
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) { write_file_atomic(path, format_obj(mesh)); }

TriangleMesh parse_ply(std::string_view text)
{
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines[0]) != "ply") throw ParseError("missing 'ply' magic", 1);

    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<std::string> properties;
        bool has_list = false;
    };
    std::vector<Element> elements;
    std::size_t ln = 1;
    bool header_done = false;
    for (; ln < lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        const auto tok = tokens(lines[ln]);
        if (tok.empty()) continue;
        if (tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (tok.size() < 2 || tok[1] != "ascii") {
                throw ParseError("binary PLY is not supported; convert to ascii first", line_no);
            }
        } else if (tok[0] == "element") {
            if (tok.size() != 3) throw ParseError("malformed element line", line_no);
            const long long count = parse_integer(tok[2], line_no);
            if (count < 0) throw ParseError("negative element count", line_no);
            elements.push_back({std::string(tok[1]), static_cast<std::size_t>(count), {}, false});
        } else if (tok[0] == "property") {
            if (elements.empty()) throw ParseError("property before any element", line_no);
            if (tok.size() >= 5 && tok[1] == "list") {
                elements.back().has_list = true;
                elements.back().properties.emplace_back(tok[4]);
            } else if (tok.size() == 3) {
                elements.back().properties.emplace_back(tok[2]);
            } else {
                throw ParseError("malformed property line", line_no);
            }
        } else if (tok[0] == "end_header") {
            header_done = true;
            ++ln;
            break;
        } else {
            throw ParseError("unexpected header line '" + std::string(lines[ln]) + "'", line_no);
        }
    }
    if (!header_done) throw ParseError("missing end_header");

    std::vector<Vec3> positions;
    std::vector<Face> faces;
    auto next_line = [&](const std::string& what) {
        while (ln < lines.size() && trim(lines[ln]).empty()) ++ln;
        if (ln >= lines.size()) {
            throw ParseError("file ends before all " + what + " records declared in the header were read");
        }
        return ln++;
    };
    for (const Element& el : elements) {
        if (el.name == "vertex") {
            const auto find = [&](const char* name) {
                const auto it = std::find(el.properties.begin(), el.properties.end(), name);
                if (it == el.properties.end()) throw ParseError(std::string("vertex element lacks property ") + name);
                return static_cast<std::size_t>(it - el.properties.begin());
            };
            const std::size_t ix = find("x"), iy = find("y"), iz = find("z");
            for (std::size_t i = 0; i < el.count; ++i) {
                const std::size_t at = next_line("vertex");
                const auto tok = tokens(lines[at]);
                if (tok.size() != el.properties.size()) {
                    throw ParseError("vertex record has " + std::to_string(tok.size()) + " values, header declares " +
                                     std::to_string(el.properties.size()), at + 1);
                }
                positions.emplace_back(parse_double(tok[ix], at + 1), parse_double(tok[iy], at + 1),
                                       parse_double(tok[iz], at + 1));
            }
        } else if (el.name == "face") {
            if (!el.has_list || el.properties.size() != 1) {
                throw ParseError("face element must have exactly one vertex index list");
            }
            for (std::size_t i = 0; i < el.count; ++i) {
                const std::size_t at = next_line("face");
                const auto tok = tokens(lines[at]);
                if (tok.empty()) throw ParseError("empty face record", at + 1);
                const long long k = parse_integer(tok[0], at + 1);
                if (k < 3 || static_cast<std::size_t>(k) + 1 != tok.size()) {
                    throw ParseError("face record length does not match its vertex count", at + 1);
                }
                std::vector<std::size_t> polygon;
                for (std::size_t t = 1; t < tok.size(); ++t) {
                    const long long index = parse_integer(tok[t], at + 1);
                    if (index < 0) throw ParseError("negative vertex index", at + 1);
                    polygon.push_back(static_cast<std::size_t>(index));
                }
                append_fan(faces, polygon);
            }
        } else {
            for (std::size_t i = 0; i < el.count; ++i) next_line(el.name);
        }
    }
    for (; ln < lines.size(); ++ln) {
        if (!trim(lines[ln]).empty()) throw ParseError("more records than the header declares", ln + 1);
    }
    return TriangleMesh(std::move(positions), std::move(faces));
}

std::string format_ply(const TriangleMesh& mesh)
{
    std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(mesh.vertex_count()) +
                      "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
                      std::to_string(mesh.face_count()) + "\nproperty list uchar int vertex_indices\nend_header\n";
    for (const Vec3& p : mesh.positions()) {
        out += format_real(p.x(), 9) + ' ' + format_real(p.y(), 9) + ' ' + format_real(p.z(), 9) + '\n';
    }
    for (const Face& f : mesh.faces()) {
        out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n';
    }
    return out;
}

TriangleMesh read_ply(const std::filesystem::path& path) { return parse_ply(read_file(path)); }
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh) { write_file_atomic(path, format_ply(mesh)); }

TriangleMesh read_mesh(const std::filesystem::path& path)
{
    const std::string ext = mesh_extension(path);
    if (ext == ".obj") return read_obj(path);
    if (ext == ".ply") return read_ply(path);
    throw Error("unsupported mesh format '" + ext + "' (expected .obj or .ply)");
}

void write_mesh(const std::filesystem::path& path, const TriangleMesh& mesh)
{
    const std::string ext = mesh_extension(path);
    if (ext == ".obj") return write_obj(path, mesh);
    if (ext == ".ply") return write_ply(path, mesh);
    throw Error("unsupported mesh format '" + ext + "' (expected .obj or .ply)");
}

Image parse_netpbm(std::string_view bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a netpbm image");
    const char kind = bytes[1];
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
        throw ParseError(std::string("unsupported netpbm magic P") + kind + " (expected P2, P3, P5 or P6)");
    }
    const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;
    const bool raw = kind == '5' || kind == '6';

    std::size_t pos = 2;
    auto next_token = [&]() -> std::string_view {
        for (;;) {
            while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw ParseError("truncated netpbm data");
        return bytes.substr(start, pos - start);
    };

    const long long width = parse_integer(next_token(), 0);
    const long long height = parse_integer(next_token(), 0);
    const long long maxval = parse_integer(next_token(), 0);
    if (width < 1 || height < 1) throw ParseError("netpbm dimensions must be positive");
    if (maxval != 255) throw ParseError("netpbm maxval must be 255, got " + std::to_string(maxval));

    const GridDomain grid(static_cast<std::size_t>(width), static_cast<std::size_t>(height));
    const std::size_t count = grid.size() * channels;
    std::vector<double> values(count);
    if (raw) {
        if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            throw ParseError("missing whitespace after netpbm header");
        }
        ++pos;
        if (bytes.size() - pos < count) throw ParseError("raw netpbm data is truncated");
        for (std::size_t i = 0; i < count; ++i) values[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long long v = parse_integer(next_token(), 0);
            if (v < 0 || v > 255) throw ParseError("sample value out of range: " + std::to_string(v));
            values[i] = static_cast<double>(v) / 255.0;
        }
    }
    return Image{grid, Signal(DomainKind::pixel, grid.size(), channels, std::move(values))};
}

std::string format_netpbm(const Image& image, NetpbmEncoding encoding)
{
    const std::size_t channels = image.pixels.channels();
    if (channels != 1 && channels != 3) throw ShapeError("netpbm images need 1 or 3 channels");
    if (image.pixels.size() != image.grid.size()) throw ShapeError("image pixels do not match the grid");
    const bool raw = encoding == NetpbmEncoding::raw;
    const char* magic = channels == 1 ? (raw ? "P5" : "P2") : (raw ? "P6" : "P3");
    std::string out = std::string(magic) + '\n' + std::to_string(image.grid.width) + ' ' +
                      std::to_string(image.grid.height) + "\n255\n";
    auto quantize = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    const auto values = image.pixels.values();
    if (raw) {
        for (double v : values) out.push_back(static_cast<char>(quantize(v)));
        return out;
    }
    const std::size_t per_row = image.grid.width * channels;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(quantize(values[i]));
        out += (i + 1) % per_row == 0 ? '\n' : ' ';
    }
    return out;
}

Image read_image(const std::filesystem::path& path) { return parse_netpbm(read_file(path)); }
void write_image(const std::filesystem::path& path, const Image& image, NetpbmEncoding encoding)
{
    write_file_atomic(path, format_netpbm(image, encoding));
}

CloudParse parse_xyzn(std::string_view text)
{
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::size_t renormalized = 0;
    const auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto tok = tokens(lines[ln]);
        if (tok.empty() || tok[0].front() == '#') continue;
        if (tok.size() != 6) throw ParseError("expected 'x y z nx ny nz'", ln + 1);
        double v[6];
        for (int k = 0; k < 6; ++k) v[k] = parse_double(tok[k], ln + 1);
        Vec3 n(v[3], v[4], v[5]);
        const double len = n.norm();
        if (std::abs(len - 1.0) > 0.1) throw ParseError("normal length " + format_real(len, 6) + " is not near 1", ln + 1);
        if (std::abs(len - 1.0) > 1e-9) ++renormalized;
        points.emplace_back(v[0], v[1], v[2]);
        normals.push_back(n / len);
    }
    if (points.empty()) throw ParseError("point cloud file contains no points");
    return CloudParse{OrientedPointCloud(std::move(points), std::move(normals)), renormalized};
}

std::string format_xyzn(const OrientedPointCloud& cloud)
{
    std::string out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points()[i];
        const Vec3& n = cloud.normals()[i];
        out += format_real(p.x(), 10) + ' ' + format_real(p.y(), 10) + ' ' + format_real(p.z(), 10) + ' ' +
               format_real(n.x(), 10) + ' ' + format_real(n.y(), 10) + ' ' + format_real(n.z(), 10) + '\n';
    }
    return out;
}

CloudParse read_xyzn(const std::filesystem::path& path) { return parse_xyzn(read_file(path)); }
void write_xyzn(const std::filesystem::path& path, const OrientedPointCloud& cloud)
{
    write_file_atomic(path, format_xyzn(cloud));
}

std::string format_histograms_csv(const HistogramField& field)
{
    std::string out = "element";
    for (std::size_t i = 0; i < field.bins(); ++i) out += ",bin_" + std::to_string(i);
    out += '\n';
    for (std::size_t e = 0; e < field.size(); ++e) {
        out += std::to_string(e);
        for (double v : field.row(e)) out += ',' + format_real(v, 6);
        out += '\n';
    }
    return out;
}

void write_histograms_csv(const std::filesystem::path& path, const HistogramField& field)
{
    write_file_atomic(path, format_histograms_csv(field));
}

Signal parse_signal_csv(std::string_view text, DomainKind kind)
{
    const auto lines = split_lines(text);
    std::vector<double> values;
    std::size_t channels = 0;
    std::size_t rows = 0;
    bool indexed = false;
    bool first = true;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string_view line = trim(lines[ln]);
        if (line.empty() || line.front() == '#') continue;
        auto tok = tokens(line, ',');
        if (first) {
            first = false;
            if (tok[0] == "element") {
                indexed = true;
                channels = tok.size() - 1;
                if (channels == 0) throw ParseError("signal header declares no channels", ln + 1);
                continue;
            }
        }
        if (indexed) {
            if (parse_integer(tok[0], ln + 1) != static_cast<long long>(rows)) {
                throw ParseError("element index out of sequence", ln + 1);
            }
            tok.erase(tok.begin());
        }
        if (channels == 0) channels = tok.size();
        if (tok.size() != channels) {
            throw ParseError("expected " + std::to_string(channels) + " values, got " + std::to_string(tok.size()), ln + 1);
        }
        for (auto t : tok) values.push_back(parse_double(t, ln + 1));
        ++rows;
    }
    if (rows == 0) throw ParseError("signal file contains no rows");
    return Signal(kind, rows, channels, std::move(values));
}

std::string format_signal_csv(const Signal& signal)
{
    std::string out = "element";
    for (std::size_t c = 0; c < signal.channels(); ++c) out += ",c" + std::to_string(c);
    out += '\n';
    for (std::size_t e = 0; e < signal.size(); ++e) {
        out += std::to_string(e);
        for (double v : signal[e]) out += ',' + format_real(v, 17);
        out += '\n';
    }
    return out;
}

Signal read_signal_csv(const std::filesystem::path& path, DomainKind kind)
{
    return parse_signal_csv(read_file(path), kind);
}

void write_signal_csv(const std::filesystem::path& path, const Signal& signal)
{
    write_file_atomic(path, format_signal_csv(signal));
}

} // namespace genshift::io
