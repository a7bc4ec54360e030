#include "lfsg/interpret.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <zlib.h>

#include "lfsg/errors.hpp"

namespace lfsg {
namespace {

std::vector<std::vector<int>> members_or_throw(const Labels& labels,
                                               Eigen::Index n_cols) {
  if (labels.size() != static_cast<std::size_t>(n_cols))
    throw LengthMismatch("cluster_representatives: labels/sample count differ");
  int C = 0;
  for (const int l : labels) {
    if (l < 0) throw InvalidSpec("cluster_representatives: negative label");
    C = std::max(C, l + 1);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(C));
  for (int j = 0; j < static_cast<int>(labels.size()); ++j)
    members[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])]
        .push_back(j);
  for (std::size_t c = 0; c < members.size(); ++c)
    if (members[c].empty())
      throw EmptyCluster("cluster_representatives: cluster " +
                         std::to_string(c + 1) + " has no members");
  return members;
}

void flip_to_nonnegative_sum(Eigen::Ref<Vector> u) {
  const double s = u.sum();
  if (s < 0.0) {
    u = -u;
    return;
  }
  if (s > 0.0) return;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) != 0.0) {
      if (u(i) < 0.0) u = -u;
      return;
    }
  }
}

unsigned char quantize(double v, double lo, double range) {
  const double scaled = (v - lo) * 255.0 / range;
  const double rounded = std::floor(scaled + 0.5);  // half-up
  if (rounded <= 0.0) return 0;
  if (rounded >= 255.0) return 255;
  return static_cast<unsigned char>(rounded);
}

std::vector<unsigned char> to_bytes(const Matrix& pixels) {
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(pixels.size()));
  for (Eigen::Index i = 0; i < pixels.rows(); ++i) {
    for (Eigen::Index j = 0; j < pixels.cols(); ++j) {
      const double v = pixels(i, j);
      if (v < -0.5 || v >= 255.5)
        throw InvalidSpec("image pixel outside [0,255]");
      bytes.push_back(static_cast<unsigned char>(std::floor(v + 0.5)));
    }
  }
  return bytes;
}

void push_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

std::uint32_t read_u32_be(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  const std::vector<unsigned char>& data) {
  push_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0, out.data() + type_at, static_cast<uInt>(4 + data.size())));
  push_u32_be(out, crc);
}

}  // namespace

std::vector<Vector> cluster_representatives(const Matrix& X_in,
                                            const Labels& labels, int d) {
  if (X_in.size() == 0)
    throw EmptyMatrix("cluster_representatives: empty data");
  if (d < 1) throw InvalidSpec("cluster_representatives: d must be positive");
  const auto members = members_or_throw(labels, X_in.cols());

  std::vector<Vector> reps;
  reps.reserve(members.size());
  for (const auto& idx : members) {
    Matrix block(X_in.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
      block.col(static_cast<Eigen::Index>(k)) = X_in.col(idx[k]);

    Eigen::BDCSVD<Matrix> svd(block, Eigen::ComputeThinU);
    const Vector& sv = svd.singularValues();
    Vector a = Vector::Zero(X_in.rows());
    const int limit = std::min<int>(d, static_cast<int>(sv.size()));
    for (int j = 0; j < limit; ++j) {
      if (!(sv(j) > 1e-10 * sv(0))) break;  // rank cutoff
      Vector u = svd.matrixU().col(j);
      flip_to_nonnegative_sum(u);
      a += sv(j) * u;
    }
    reps.push_back(std::move(a));
  }
  return reps;
}

Matrix matricize(const Vector& a, int Dx, int Dy) {
  if (Dx < 1 || Dy < 1 ||
      a.size() != static_cast<Eigen::Index>(Dx) * Dy)
    throw ShapeMismatch("matricize: length must equal Dx*Dy");
  Matrix A(Dx, Dy);
  for (int j = 0; j < Dy; ++j)
    for (int i = 0; i < Dx; ++i)
      A(i, j) = a(static_cast<Eigen::Index>(j) * Dx + i);
  return A;
}

std::vector<std::string> export_images(const std::vector<Matrix>& images,
                                       const std::string& dir,
                                       ImageFormat format) {
  if (images.empty()) throw EmptyMatrix("export_images: no images");
  std::filesystem::create_directories(dir);

  std::vector<std::string> paths;
  paths.reserve(images.size());
  for (std::size_t c = 0; c < images.size(); ++c) {
    const Matrix& img = images[c];
    if (img.size() == 0) throw EmptyMatrix("export_images: empty image");
    const double lo = img.minCoeff();
    const double hi = img.maxCoeff();
    Matrix pixels(img.rows(), img.cols());
    if (hi > lo) {
      const double range = hi - lo;
      for (Eigen::Index i = 0; i < img.rows(); ++i)
        for (Eigen::Index j = 0; j < img.cols(); ++j)
          pixels(i, j) = quantize(img(i, j), lo, range);
    } else {
      pixels.setZero();  // constant image carries no contrast
    }
    const char* ext = format == ImageFormat::PGM ? "pgm" : "png";
    const std::string path =
        (std::filesystem::path(dir) /
         ("cluster_" + std::to_string(c + 1) + "." + ext))
            .string();
    if (format == ImageFormat::PGM)
      write_pgm(path, pixels);
    else
      write_png(path, pixels);
    paths.push_back(path);
  }
  return paths;
}

void write_pgm(const std::string& path, const Matrix& pixels) {
  const std::vector<unsigned char> bytes = to_bytes(pixels);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path);
}

Matrix read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw ParseError(path + ": not a binary PGM");
  long width = 0, height = 0, maxval = 0;
  is >> width >> height >> maxval;
  if (!is || width < 1 || height < 1 || maxval != 255)
    throw ParseError(path + ": unsupported PGM header");
  is.get();  // single whitespace byte before the raster
  Matrix pixels(height, width);
  std::vector<unsigned char> row(static_cast<std::size_t>(width));
  for (long i = 0; i < height; ++i) {
    is.read(reinterpret_cast<char*>(row.data()), width);
    if (!is) throw ParseError(path + ": truncated raster");
    for (long j = 0; j < width; ++j)
      pixels(i, j) = static_cast<double>(row[static_cast<std::size_t>(j)]);
  }
  return pixels;
}

void write_png(const std::string& path, const Matrix& pixels) {
  const Eigen::Index rows = pixels.rows();
  const Eigen::Index cols = pixels.cols();
  const std::vector<unsigned char> bytes = to_bytes(pixels);

  // raw stream: one 0 (no-op) filter byte before every scanline
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(rows) * (static_cast<std::size_t>(cols) + 1));
  for (Eigen::Index i = 0; i < rows; ++i) {
    raw.push_back(0);
    raw.insert(raw.end(),
               bytes.begin() + static_cast<std::ptrdiff_t>(i * cols),
               bytes.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
  }
  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(comp_size);
  if (compress2(compressed.data(), &comp_size, raw.data(),
                static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK)
    throw IoError("png: deflate failed");
  compressed.resize(comp_size);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<unsigned char> ihdr;
  push_u32_be(ihdr, static_cast<std::uint32_t>(cols));
  push_u32_be(ihdr, static_cast<std::uint32_t>(rows));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // color type: grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter method
  ihdr.push_back(0);  // no interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", {});

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  if (!os) throw IoError("write failed for " + path);
}

Matrix read_png(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::vector<unsigned char> file((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (file.size() < 8 || std::memcmp(file.data(), sig, 8) != 0)
    throw ParseError(path + ": not a PNG");

  std::size_t pos = 8;
  std::uint32_t width = 0, height = 0;
  std::vector<unsigned char> idat;
  while (pos + 12 <= file.size()) {
    const std::uint32_t len = read_u32_be(file.data() + pos);
    if (pos + 12 + len > file.size())
      throw ParseError(path + ": truncated chunk");
    const char* type = reinterpret_cast<const char*>(file.data() + pos + 4);
    const unsigned char* data = file.data() + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw ParseError(path + ": bad IHDR");
      width = read_u32_be(data);
      height = read_u32_be(data + 4);
      if (data[8] != 8 || data[9] != 0 || data[12] != 0)
        throw ParseError(path + ": only 8-bit non-interlaced grayscale supported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (width == 0 || height == 0 || idat.empty())
    throw ParseError(path + ": missing image data");

  uLongf raw_size = static_cast<uLongf>(height) * (width + 1);
  std::vector<unsigned char> raw(raw_size);
  if (uncompress(raw.data(), &raw_size, idat.data(),
                 static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != static_cast<uLongf>(height) * (width + 1))
    throw ParseError(path + ": inflate failed");

  Matrix pixels(height, width);
  for (std::uint32_t i = 0; i < height; ++i) {
    const unsigned char* line = raw.data() + static_cast<std::size_t>(i) * (width + 1);
    if (line[0] != 0)
      throw ParseError(path + ": unsupported scanline filter");
    for (std::uint32_t j = 0; j < width; ++j)
      pixels(i, j) = static_cast<double>(line[1 + j]);
  }
  return pixels;
}

}  // namespace lfsg
