#include "fpc/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "fpc/errors.hpp"
#include "fpc/textio.hpp"

namespace fpc {

namespace {

// Reads the next whitespace-delimited token, skipping '#' comment lines.
std::string next_token(const std::string& s, std::size_t& pos) {
    while (pos < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        } else if (s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '#') ++pos;
    return s.substr(start, pos - start);
}

long parse_header_int(const std::string& s, std::size_t& pos, const std::string& what,
                      const std::string& path) {
    std::string tok = next_token(s, pos);
    if (tok.empty()) throw DataError(path + ": truncated PGM header (" + what + ")");
    try {
        return static_cast<long>(parse_double(tok, what));
    } catch (const DataError&) {
        throw DataError(path + ": bad PGM " + what + " '" + tok + "'");
    }
}

}  // namespace

Matrix load_pgm(const std::string& path) {
    std::string raw = read_file(path);
    std::size_t pos = 0;
    std::string magic = next_token(raw, pos);
    if (magic != "P2" && magic != "P5")
        throw DataError(path + ": not a PGM file (magic '" + magic + "')");
    long w = parse_header_int(raw, pos, "width", path);
    long h = parse_header_int(raw, pos, "height", path);
    long maxval = parse_header_int(raw, pos, "maxval", path);
    if (w <= 0 || h <= 0) throw DataError(path + ": empty image");
    if (maxval <= 0 || maxval > 65535) throw DataError(path + ": unsupported PGM maxval");

    Matrix pixels(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
    std::size_t count = pixels.data.size();
    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            std::string tok = next_token(raw, pos);
            if (tok.empty()) throw DataError(path + ": truncated PGM pixel data");
            double v = parse_double(tok, "pixel");
            if (v < 0 || v > maxval) throw DataError(path + ": pixel out of range");
            pixels.data[i] = v;
        }
    } else {
        if (pos >= raw.size()) throw DataError(path + ": truncated PGM pixel data");
        ++pos;  // single whitespace byte after maxval
        int bytes = maxval > 255 ? 2 : 1;
        if (raw.size() - pos < count * static_cast<std::size_t>(bytes))
            throw DataError(path + ": truncated PGM pixel data");
        for (std::size_t i = 0; i < count; ++i) {
            unsigned v = static_cast<unsigned char>(raw[pos++]);
            if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(raw[pos++]);
            pixels.data[i] = static_cast<double>(v);
        }
    }
    return pixels;
}

void save_pgm(const Matrix& pixels, const std::string& path) {
    if (pixels.rows == 0 || pixels.cols == 0) throw DataError("empty image");
    std::ostringstream out;
    out << "P2\n" << pixels.cols << ' ' << pixels.rows << "\n255\n";
    for (std::size_t r = 0; r < pixels.rows; ++r) {
        for (std::size_t c = 0; c < pixels.cols; ++c) {
            long v = std::lround(std::clamp(pixels(r, c), 0.0, 255.0));
            out << v << (c + 1 == pixels.cols ? '\n' : ' ');
        }
    }
    write_file_atomic(path, out.str());
}

}  // namespace fpc
