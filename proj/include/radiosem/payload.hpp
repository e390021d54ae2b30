#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radiosem/gridmap.hpp"
#include "radiosem/ldpl.hpp"

namespace radiosem {

enum class Scheme : std::uint8_t { Vq = 0, Jpeg = 1 };

/// The transmitted semantics: BS locations, fitted LDPL parameters and the
/// compressed segmentation blob.
struct SemanticPayload {
    Scheme scheme = Scheme::Vq;
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<PixelCoord> bs_list;
    std::vector<LdplParams> ldpl_list;  // aligned with bs_list; f32 on the wire
    std::vector<std::uint8_t> seg_blob;
};

/// Wire layout ("RSEM", little-endian): u8 version=1, u8 scheme, u16 w,
/// u16 h, u8 n_bs, per BS {u16 x, u16 y, f32 pl0, f32 theta_tilde},
/// u32 blob_len, blob. Deterministic, byte-identical for equal payloads.
std::vector<std::uint8_t> serialize(const SemanticPayload& p);
SemanticPayload deserialize(std::span<const std::uint8_t> bytes);

/// Size of the protected prefix (header + BS records) of a serialized
/// payload; used by the channel's protect_header option.
std::size_t header_span_bytes(std::span<const std::uint8_t> bytes);

/// Binary symmetric channel over a byte stream.
struct ChannelConfig {
    double ber = 0.0;            // independent bit-flip probability, < 1
    std::uint64_t seed = 0;
    bool protect_header = true;  // exempt the RSEM header + BS records
};

std::vector<std::uint8_t> apply_channel(std::span<const std::uint8_t> bytes,
                                        const ChannelConfig& cfg);

/// 8 * len / 1000 kbit.
double measure_bandwidth(std::span<const std::uint8_t> bytes);

/// Cost of the raw alternative: 1 bit per segmentation pixel plus
/// (u16, u16, f32) = 64 bits per sparse sample.
std::uint64_t raw_baseline_bits(const GridMap& buildings,
                                const SparseObservationSet& samples);

}  // namespace radiosem
