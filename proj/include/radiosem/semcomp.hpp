#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "radiosem/gridmap.hpp"

namespace radiosem {

/// VQ codebook: n codewords of dimension L, stored row-major.
struct Codebook {
    int n = 0;
    int L = 0;
    std::vector<double> codewords;  // n * L

    std::span<const double> codeword(int i) const {
        return {codewords.data() + static_cast<std::size_t>(i) * L,
                static_cast<std::size_t>(L)};
    }
};

/// Non-overlapping P x P patches of a map, each flattened row-major.
struct PatchSet {
    std::vector<std::vector<double>> patches;  // rows * cols entries of length P*P
    int rows = 0;   // A = height / P
    int cols = 0;   // B = width / P
    int patch = 0;  // P
    MapKind kind = MapKind::Binary;
};

/// Indices of the nearest codeword per patch, row-major over the patch grid.
struct VqEncoding {
    std::vector<std::uint16_t> indices;  // rows * cols, each < codebook.n
    int rows = 0;
    int cols = 0;
    int patch = 0;
};

PatchSet patchify(const GridMap& map, int patch);
GridMap unpatchify(const PatchSet& patches, int width, int height);

/// Lloyd's k-means with seeded k-means++ init. Deterministic per seed;
/// within-cluster SSE is non-increasing over iterations. Needs at least n
/// distinct latent vectors. Duplicate centroids are replaced post-training.
Codebook train_codebook(const std::vector<std::vector<double>>& latents, int n,
                        int iters, std::uint64_t seed);

/// Index of the codeword nearest to z (squared Euclidean, ties to the
/// smallest index).
int nearest_codeword(std::span<const double> z, const Codebook& cb);

VqEncoding vq_encode(const PatchSet& patches, const Codebook& cb);

/// Rebuilds the map from codewords and re-binarizes at 0.5.
GridMap vq_decode(const VqEncoding& enc, const Codebook& cb);

/// Bits needed per VQ index: ceil(log2 n); zero when n == 1.
int vq_index_bits(int n_codewords);

/// Index vector packed MSB-first at vq_index_bits(n) bits each, padded to
/// whole bytes (at least one byte so payload blobs are never empty).
std::vector<std::uint8_t> pack_vq_blob(const VqEncoding& enc, int n_codewords);
VqEncoding unpack_vq_blob(std::span<const std::uint8_t> blob, int n_codewords,
                          int patch, int width, int height);

// ---- JPEG-style path -------------------------------------------------------

using Block8 = std::array<double, 64>;

/// Orthonormal 2-D DCT pair (type II / III).
Block8 dct_block_forward(const Block8& block);
Block8 dct_block_inverse(const Block8& coefficients);

/// Quantization step table for quality q in [1, 100]: the standard JPEG
/// luminance table scaled for binary dynamic range.
std::array<int, 64> jpeg_quant_steps(int quality);

/// Encodes a binary map (dims divisible by 8): per-block DCT, quantization,
/// zig-zag, DC DPCM, global run-length of zeros and LEB128 varints.
/// Stream: "RSJB", u8 q, u16 w, u16 h, u32 n_pairs, pairs.
std::vector<std::uint8_t> jpeg_encode_binary(const GridMap& map, int quality);

/// Inverse pipeline plus a 0.5 threshold filter; output is strictly binary.
GridMap jpeg_decode_binary(std::span<const std::uint8_t> bytes);

/// Transmission cost in bits: VQ index vector or raw byte stream.
std::uint64_t payload_bits(const VqEncoding& enc, int n_codewords);
std::uint64_t payload_bits(std::span<const std::uint8_t> bytes);

/// Codebook file: "RSCB", u8 version, u16 n, u16 L, n*L little-endian f32.
void save_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook load_codebook(const std::filesystem::path& path);
std::vector<std::uint8_t> codebook_to_bytes(const Codebook& cb);
Codebook codebook_from_bytes(std::span<const std::uint8_t> bytes);

}  // namespace radiosem
