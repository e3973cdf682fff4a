#include <oamid/pgm.hpp>

#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>

namespace oamid {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in)
{
    std::string token;
    char c = 0;
    while (in.get(c)) {
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty())
                return token;
            continue;
        }
        token.push_back(c);
    }
    return token;
}

int header_int(std::istream& in, const char* what)
{
    const std::string token = header_token(in);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size())
            throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("pgm: bad ") + what + " '" + token + "'");
    }
}

} // namespace

GrayImage read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("pgm: cannot open " + path.string());
    if (header_token(in) != "P5")
        throw std::runtime_error("pgm: " + path.string() + " is not a binary P5 image");

    GrayImage image;
    image.width = header_int(in, "width");
    image.height = header_int(in, "height");
    image.maxval = header_int(in, "maxval");
    if (image.width <= 0 || image.height <= 0)
        throw std::runtime_error("pgm: non-positive dimensions");
    if (image.maxval <= 0 || image.maxval > 65535)
        throw std::runtime_error("pgm: maxval out of range");

    const std::size_t count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    const bool wide = image.maxval > 255;
    std::vector<unsigned char> raw(count * (wide ? 2 : 1));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error("pgm: truncated pixel data in " + path.string());

    image.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint16_t v = wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1])
                                     : static_cast<std::uint16_t>(raw[i]);
        if (v > image.maxval)
            throw std::runtime_error("pgm: sample exceeds maxval in " + path.string());
        image.pixels[i] = v;
    }
    return image;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image)
{
    const std::size_t count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    if (image.width <= 0 || image.height <= 0 || image.pixels.size() != count)
        throw std::invalid_argument("pgm: pixel count does not match dimensions");
    if (image.maxval <= 0 || image.maxval > 65535)
        throw std::invalid_argument("pgm: maxval out of range");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("pgm: cannot write " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << '\n' << image.maxval << '\n';
    const bool wide = image.maxval > 255;
    for (const std::uint16_t v : image.pixels) {
        if (wide) {
            out.put(static_cast<char>(v >> 8));
            out.put(static_cast<char>(v & 0xff));
        } else {
            out.put(static_cast<char>(v));
        }
    }
    if (!out)
        throw std::runtime_error("pgm: write failed for " + path.string());
}

} // namespace oamid
