#include "diskfit/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace diskfit {

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c))
            continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
            tok.push_back(static_cast<char>(in.get()));
        return tok;
    }
    throw Error(ErrorCode::IoError, "pgm: unexpected end of header");
}

int parse_int(const std::string& tok, const char* what) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size())
            throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::IoError, std::string("pgm: malformed ") + what);
    }
}

} // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "pgm: cannot open " + path.string());

    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5")
        throw Error(ErrorCode::IoError, "pgm: unsupported magic '" + magic + "'");

    const int width = parse_int(next_token(in), "width");
    const int height = parse_int(next_token(in), "height");
    const int maxval = parse_int(next_token(in), "maxval");
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw Error(ErrorCode::IoError, "pgm: invalid header fields");

    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<double> pixels(count);

    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            const int v = parse_int(next_token(in), "sample");
            if (v < 0 || v > maxval)
                throw Error(ErrorCode::IoError, "pgm: sample out of range");
            pixels[i] = static_cast<double>(v);
        }
    } else {
        // single whitespace byte after maxval, then the raster
        in.get();
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw Error(ErrorCode::IoError, "pgm: truncated payload");
        for (std::size_t i = 0; i < count; ++i) {
            const unsigned v = bytes == 1
                                   ? raw[i]
                                   : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            if (v > static_cast<unsigned>(maxval))
                throw Error(ErrorCode::IoError, "pgm: sample out of range");
            pixels[i] = static_cast<double>(v);
        }
    }
    return GrayImage(width, height, std::move(pixels));
}

namespace {

unsigned quantise(double v, int maxval) {
    const long q = std::lround(v);
    return static_cast<unsigned>(std::clamp(q, 0L, static_cast<long>(maxval)));
}

void write_header(std::ostream& out, const char* magic, const GrayImage& image, int maxval) {
    out << magic << "\n" << image.width() << " " << image.height() << "\n" << maxval << "\n";
}

} // namespace

void write_pgm(const GrayImage& image, const std::filesystem::path& path, int maxval) {
    if (maxval <= 0 || maxval > 65535)
        throw Error(ErrorCode::InvalidInput, "pgm: maxval must be in [1, 65535]");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "pgm: cannot open " + path.string() + " for writing");
    write_header(out, "P5", image, maxval);
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw;
    raw.reserve(image.pixels().size() * bytes);
    for (double v : image.pixels()) {
        const unsigned q = quantise(v, maxval);
        if (bytes == 2)
            raw.push_back(static_cast<unsigned char>(q >> 8));
        raw.push_back(static_cast<unsigned char>(q & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "pgm: write failed");
}

void write_pgm_ascii(const GrayImage& image, const std::filesystem::path& path, int maxval) {
    if (maxval <= 0 || maxval > 65535)
        throw Error(ErrorCode::InvalidInput, "pgm: maxval must be in [1, 65535]");
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "pgm: cannot open " + path.string() + " for writing");
    write_header(out, "P2", image, maxval);
    int col = 0;
    for (double v : image.pixels()) {
        out << quantise(v, maxval);
        if (++col == 16) {
            out << "\n";
            col = 0;
        } else {
            out << " ";
        }
    }
    out << "\n";
    if (!out)
        throw Error(ErrorCode::IoError, "pgm: write failed");
}

} // namespace diskfit
