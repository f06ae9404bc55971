#include "cwseg/image_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cwseg {

const char* to_string(Label label) noexcept {
    return label == Label::Object ? "OBJECT" : "BACKGROUND";
}

Label label_from_string(const std::string& s) {
    if (s == "OBJECT") return Label::Object;
    if (s == "BACKGROUND") return Label::Background;
    throw FormatError("unknown label '" + s + "'");
}

RasterImage::RasterImage(int w, int h, int c, std::uint8_t fill)
    : width(w), height(h), channels(c) {
    detail::require(w >= 1 && h >= 1, "image dimensions must be >= 1");
    detail::require(c == 1 || c == 3, "image channels must be 1 or 3");
    data.assign(std::size_t(w) * std::size_t(h) * std::size_t(c), fill);
}

RasterImage::RasterImage(int w, int h, int c, std::vector<std::uint8_t> values)
    : width(w), height(h), channels(c), data(std::move(values)) {
    detail::require(w >= 1 && h >= 1, "image dimensions must be >= 1");
    detail::require(c == 1 || c == 3, "image channels must be 1 or 3");
    detail::require(data.size() == std::size_t(w) * std::size_t(h) * std::size_t(c),
                    "image data length must equal width*height*channels");
}

GroundTruthMask::GroundTruthMask(int w, int h, Label fill) : width(w), height(h) {
    detail::require(w >= 1 && h >= 1, "mask dimensions must be >= 1");
    labels.assign(std::size_t(w) * std::size_t(h), fill);
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comment lines, then reads one decimal token.
    long token(const char* field) {
        skip_space_and_comments();
        std::size_t start = pos_;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
        if (start == pos_) throw FormatError(std::string("netpbm header: missing or non-numeric ") + field);
        if (pos_ - start > 9) throw FormatError(std::string("netpbm header: ") + field + " out of range");
        return std::stol(bytes_.substr(start, pos_ - start));
    }

    // The single whitespace byte separating maxval from the raster.
    void end_of_header() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            throw FormatError("netpbm header: expected single whitespace after maxval");
        ++pos_;
    }

    std::size_t position() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

RasterImage decode_netpbm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw FormatError("netpbm magic: expected P5 or P6");
    const int channels = bytes[1] == '5' ? 1 : 3;

    HeaderReader reader(bytes);
    reader.advance(2);
    const long width = reader.token("width");
    const long height = reader.token("height");
    const long maxval = reader.token("maxval");
    if (width < 1) throw FormatError("netpbm width: must be >= 1");
    if (height < 1) throw FormatError("netpbm height: must be >= 1");
    if (maxval != 255) throw FormatError("netpbm maxval: expected 255, found " + std::to_string(maxval));
    reader.end_of_header();

    const std::size_t need = std::size_t(width) * std::size_t(height) * std::size_t(channels);
    const std::size_t have = bytes.size() - reader.position();
    if (have < need)
        throw FormatError("netpbm payload: truncated, expected " + std::to_string(need) + " bytes, found " +
                          std::to_string(have));

    auto begin = bytes.begin() + std::ptrdiff_t(reader.position());
    std::vector<std::uint8_t> data(begin, begin + std::ptrdiff_t(need));
    return RasterImage(int(width), int(height), channels, std::move(data));
}

std::string encode_netpbm(const RasterImage& image) {
    detail::require(image.channels == 1 || image.channels == 3, "image channels must be 1 or 3");
    detail::require(image.data.size() == image.pixel_count() * std::size_t(image.channels),
                    "image data length must equal width*height*channels");
    std::string out = image.channels == 1 ? "P5\n" : "P6\n";
    out += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(image.data.begin(), image.data.end());
    return out;
}

RasterImage read_image(const std::filesystem::path& path) {
    try {
        return decode_netpbm(slurp(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_image(const RasterImage& image, const std::filesystem::path& path) {
    spit(path, encode_netpbm(image));
}

RasterImage rgb_to_gray(const RasterImage& image) {
    detail::require(image.channels == 3, "rgb_to_gray requires a 3-channel image");
    RasterImage gray(image.width, image.height, 1);
    const std::size_t n = image.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        // Integer form of round(0.299 R + 0.587 G + 0.114 B); all terms are non-negative.
        const unsigned r = image.data[3 * i], g = image.data[3 * i + 1], b = image.data[3 * i + 2];
        const unsigned scaled = 299u * r + 587u * g + 114u * b;
        gray.data[i] = static_cast<std::uint8_t>((scaled + 500u) / 1000u);
    }
    return gray;
}

RasterImage to_gray(const RasterImage& image) {
    return image.channels == 1 ? image : rgb_to_gray(image);
}

GroundTruthMask mask_from_image(const RasterImage& image) {
    detail::require(image.channels == 1, "mask image must be single-channel");
    GroundTruthMask mask(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::uint8_t v = image.at(x, y);
            if (v == 255) {
                mask.at(x, y) = Label::Object;
            } else if (v != 0) {
                throw MaskFormatError("mask pixel (" + std::to_string(x) + "," + std::to_string(y) +
                                          ") has intensity " + std::to_string(v) + ", expected 0 or 255",
                                      x, y);
            }
        }
    }
    return mask;
}

RasterImage mask_to_image(const GroundTruthMask& mask) {
    RasterImage img(mask.width, mask.height, 1);
    for (std::size_t i = 0; i < mask.labels.size(); ++i)
        img.data[i] = mask.labels[i] == Label::Object ? 255 : 0;
    return img;
}

GroundTruthMask read_mask(const std::filesystem::path& path) {
    RasterImage img = read_image(path);
    if (img.channels != 1) throw FormatError(path.string() + ": mask must be a P5 file");
    try {
        return mask_from_image(img);
    } catch (const MaskFormatError& e) {
        throw MaskFormatError(path.string() + ": " + e.what(), e.x(), e.y());
    }
}

void write_mask(const GroundTruthMask& mask, const std::filesystem::path& path) {
    write_image(mask_to_image(mask), path);
}

}  // namespace cwseg
