#pragma once

#include <string>
#include <vector>

#include "lfsg/types.hpp"

namespace lfsg {

/// Per-cluster representative: SVD of the raw (uncentered) cluster block,
/// each retained left singular vector sign-flipped so its entry sum is
/// nonnegative (first nonzero entry decides an exact-zero sum), then
/// a_c = sum_j sigma_j * u_j over the first min(d, rank) triplets.
std::vector<Vector> cluster_representatives(const Matrix& X_in,
                                            const Labels& labels, int d);

/// Column-major reshape of a length Dx*Dy vector into a Dx x Dy image.
Matrix matricize(const Vector& a, int Dx, int Dy);

enum class ImageFormat { PGM, PNG };

/// Min-max normalize each image to [0,255] (constant image -> all zeros,
/// half-up rounding), write 8-bit grayscale files `cluster_<c>.<ext>` with
/// 1-based c into dir. Returns the written paths in cluster order.
std::vector<std::string> export_images(const std::vector<Matrix>& images,
                                       const std::string& dir,
                                       ImageFormat format);

/// 8-bit grayscale codecs used by export_images; exposed for round-trip
/// verification. Pixel matrices hold values in [0, 255].
void write_pgm(const std::string& path, const Matrix& pixels);
Matrix read_pgm(const std::string& path);
void write_png(const std::string& path, const Matrix& pixels);
Matrix read_png(const std::string& path);

}  // namespace lfsg
