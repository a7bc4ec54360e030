#include "lfsg/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <system_error>

#include "lfsg/errors.hpp"
#include "lfsg/rng.hpp"

namespace lfsg {
namespace {

constexpr char kMagic[4] = {'L', 'F', 'S', 'G'};

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line_no) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": bad numeric field '" + token + "'");
  }
  return value;
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  b[0] = static_cast<unsigned char>(v);
  b[1] = static_cast<unsigned char>(v >> 8);
  b[2] = static_cast<unsigned char>(v >> 16);
  b[3] = static_cast<unsigned char>(v >> 24);
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

LabeledData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.ambient_dim <= 0 || spec.clusters <= 0 ||
      spec.points_per_cluster <= 0) {
    throw InvalidSpec("generate_synthetic: dimensions and counts must be positive");
  }
  if (spec.subspace_dim <= 0 || spec.subspace_dim > spec.ambient_dim) {
    throw InvalidSpec("generate_synthetic: need 0 < subspace_dim <= ambient_dim");
  }
  if (spec.noise_sigma < 0.0) {
    throw InvalidSpec("generate_synthetic: noise_sigma must be nonnegative");
  }

  const int D = spec.ambient_dim;
  const int d = spec.subspace_dim;
  const int C = spec.clusters;
  const int Nc = spec.points_per_cluster;
  const int N = C * Nc;

  Rng rng(spec.seed);
  auto gauss_matrix = [&rng](int rows, int cols) {
    Matrix G(rows, cols);
    // column-major fill so the draw order matches memory order
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) G(i, j) = rng.normal();
    return G;
  };

  LabeledData out;
  out.X.resize(D, N);
  out.labels.resize(static_cast<std::size_t>(N));
  for (int c = 0; c < C; ++c) {
    Matrix G = gauss_matrix(D, d);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix basis = qr.householderQ() * Matrix::Identity(D, d);
    Matrix coeffs = gauss_matrix(d, Nc);
    Matrix block = basis * coeffs;
    if (spec.noise_sigma > 0.0) {
      block += spec.noise_sigma * gauss_matrix(D, Nc);
    }
    out.X.middleCols(c * Nc, Nc) = block;
    std::fill(out.labels.begin() + static_cast<std::size_t>(c) * Nc,
              out.labels.begin() + static_cast<std::size_t>(c + 1) * Nc, c);
  }
  return out;
}

Split split_in_out(const LabeledData& data, double in_fraction,
                   std::uint64_t seed) {
  if (data.X.cols() == 0) throw EmptyMatrix("split_in_out: no samples");
  if (data.labels.size() != static_cast<std::size_t>(data.X.cols()))
    throw LengthMismatch("split_in_out: labels/sample count differ");
  if (!(in_fraction > 0.0 && in_fraction < 1.0))
    throw InvalidSpec("split_in_out: in_fraction must be in (0, 1)");

  const int C = count_clusters(data.labels);
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(C));
  for (int j = 0; j < static_cast<int>(data.labels.size()); ++j)
    by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(j)])]
        .push_back(j);

  Rng rng(seed);
  std::vector<int> in_idx, out_idx;
  for (auto& members : by_class) {
    const int n = static_cast<int>(members.size());
    int take = static_cast<int>(std::floor(in_fraction * n));
    if (take < 1 || take > n - 1) {
      throw InsufficientClassSize(
          "split_in_out: a class is too small to land points on both sides");
    }
    // Fisher-Yates over the class members
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(members[static_cast<std::size_t>(i)],
                members[static_cast<std::size_t>(j)]);
    }
    in_idx.insert(in_idx.end(), members.begin(), members.begin() + take);
    out_idx.insert(out_idx.end(), members.begin() + take, members.end());
  }
  std::sort(in_idx.begin(), in_idx.end());
  std::sort(out_idx.begin(), out_idx.end());

  Split split;
  auto gather = [&data](const std::vector<int>& idx) {
    LabeledData part;
    part.X.resize(data.X.rows(), static_cast<Eigen::Index>(idx.size()));
    part.labels.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      part.X.col(static_cast<Eigen::Index>(k)) = data.X.col(idx[k]);
      part.labels[k] = data.labels[static_cast<std::size_t>(idx[k])];
    }
    return part;
  };
  split.in = gather(in_idx);
  split.out = gather(out_idx);
  split.in_indices = std::move(in_idx);
  split.out_indices = std::move(out_idx);
  return split;
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string token =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      row.push_back(parse_double(token, path, line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": ragged row (expected " + std::to_string(width) +
                       " fields, got " + std::to_string(row.size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyMatrix("no data in " + path);
  Matrix X(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return X;
}

void save_matrix_csv(const std::string& path, const Matrix& X) {
  if (X.size() == 0) throw EmptyMatrix("refusing to write empty matrix");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.precision(17);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j) os << ',';
      os << X(i, j);
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed for " + path);
}

Matrix load_matrix_bin(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ParseError(path + ": bad magic, not a LFSG matrix file");
  const std::uint32_t rows = read_u32_le(is);
  const std::uint32_t cols = read_u32_le(is);
  if (!is) throw ParseError(path + ": truncated header");
  if (rows == 0 || cols == 0) throw EmptyMatrix(path + ": zero-sized matrix");
  Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint32_t j = 0; j < cols; ++j)
    for (std::uint32_t i = 0; i < rows; ++i)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          read_f64_le(is);
  if (!is) throw ParseError(path + ": truncated payload");
  return X;
}

void save_matrix_bin(const std::string& path, const Matrix& X) {
  if (X.size() == 0) throw EmptyMatrix("refusing to write empty matrix");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kMagic, 4);
  write_u32_le(os, static_cast<std::uint32_t>(X.rows()));
  write_u32_le(os, static_cast<std::uint32_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) write_f64_le(os, X(i, j));
  if (!os) throw IoError("write failed for " + path);
}

Matrix load_matrix(const std::string& path) {
  return ends_with(path, ".bin") ? load_matrix_bin(path)
                                 : load_matrix_csv(path);
}

void save_matrix(const std::string& path, const Matrix& X) {
  if (ends_with(path, ".bin"))
    save_matrix_bin(path, X);
  else
    save_matrix_csv(path, X);
}

Labels load_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* begin = line.data();
    const char* end = begin + line.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    long value = 0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || value < 1) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": labels must be positive integers");
    }
    labels.push_back(static_cast<int>(value - 1));
  }
  if (labels.empty()) throw EmptyMatrix("no labels in " + path);
  return labels;
}

void save_labels(const std::string& path, const Labels& labels) {
  if (labels.empty()) throw EmptyMatrix("refusing to write empty labels");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (const int label : labels) os << (label + 1) << '\n';
  if (!os) throw IoError("write failed for " + path);
}

int count_clusters(const Labels& labels) {
  if (labels.empty()) throw EmptyMatrix("count_clusters: no labels");
  std::set<int> seen(labels.begin(), labels.end());
  const int C = static_cast<int>(seen.size());
  if (*seen.begin() != 0 || *seen.rbegin() != C - 1) {
    throw InvalidSpec("labels must cover 0..C-1 without gaps");
  }
  return C;
}

}  // namespace lfsg
