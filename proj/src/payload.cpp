#include "radiosem/payload.hpp"

#include <string>

#include "radiosem/rng.hpp"
#include "wire_util.hpp"

namespace radiosem {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kFixedHeaderBytes = 11;  // magic, version, scheme, w, h, n_bs
constexpr std::size_t kBsRecordBytes = 12;     // u16 x, u16 y, f32 pl0, f32 theta

void validate(const SemanticPayload& p) {
    if (p.bs_list.empty() || p.bs_list.size() != p.ldpl_list.size()) {
        throw LengthMismatch("payload needs aligned, non-empty BS and LDPL lists");
    }
    if (p.bs_list.size() > 255) {
        throw TooManyBs(std::to_string(p.bs_list.size()) + " base stations, wire cap is 255");
    }
    if (p.seg_blob.empty()) {
        throw LengthMismatch("segmentation blob must be non-empty");
    }
    if (p.seg_blob.size() > 0xFFFFFFFFull) {
        throw BlobTooLarge("blob of " + std::to_string(p.seg_blob.size()) + " bytes");
    }
    for (const auto& bs : p.bs_list) {
        if (bs.x < 0 || bs.y < 0 || bs.x >= p.width || bs.y >= p.height) {
            throw LengthMismatch("BS coordinate out of the declared dims");
        }
    }
}

}  // namespace

std::vector<std::uint8_t> serialize(const SemanticPayload& p) {
    validate(p);
    std::vector<std::uint8_t> out;
    out.reserve(kFixedHeaderBytes + p.bs_list.size() * kBsRecordBytes + 4 +
                p.seg_blob.size());
    out.insert(out.end(), {'R', 'S', 'E', 'M'});
    wire::put_u8(out, kVersion);
    wire::put_u8(out, static_cast<std::uint8_t>(p.scheme));
    wire::put_u16(out, p.width);
    wire::put_u16(out, p.height);
    wire::put_u8(out, static_cast<std::uint8_t>(p.bs_list.size()));
    for (std::size_t i = 0; i < p.bs_list.size(); ++i) {
        wire::put_u16(out, static_cast<std::uint16_t>(p.bs_list[i].x));
        wire::put_u16(out, static_cast<std::uint16_t>(p.bs_list[i].y));
        wire::put_f32(out, static_cast<float>(p.ldpl_list[i].pl0));
        wire::put_f32(out, static_cast<float>(p.ldpl_list[i].theta_tilde));
    }
    wire::put_u32(out, static_cast<std::uint32_t>(p.seg_blob.size()));
    out.insert(out.end(), p.seg_blob.begin(), p.seg_blob.end());
    return out;
}

SemanticPayload deserialize(std::span<const std::uint8_t> bytes) {
    wire::Reader rd(bytes);
    rd.expect_magic("RSEM");
    const std::uint8_t version = rd.u8();
    if (version != kVersion) {
        throw UnsupportedVersion("payload version " + std::to_string(version));
    }
    const std::uint8_t scheme = rd.u8();
    if (scheme > 1) throw LengthMismatch("unknown scheme " + std::to_string(scheme));
    SemanticPayload p;
    p.scheme = static_cast<Scheme>(scheme);
    p.width = rd.u16();
    p.height = rd.u16();
    const std::uint8_t n_bs = rd.u8();
    if (n_bs == 0) throw LengthMismatch("payload declares zero base stations");
    for (int i = 0; i < n_bs; ++i) {
        PixelCoord bs{rd.u16(), rd.u16()};
        const double pl0 = rd.f32();
        const double theta = rd.f32();
        if (bs.x >= p.width || bs.y >= p.height) {
            throw LengthMismatch("BS coordinate out of the declared dims");
        }
        p.bs_list.push_back(bs);
        p.ldpl_list.push_back({pl0, theta});
    }
    const std::uint32_t blob_len = rd.u32();
    if (blob_len == 0) throw LengthMismatch("payload declares an empty blob");
    if (rd.remaining() < blob_len) {
        throw Truncated("blob cut short: " + std::to_string(rd.remaining()) + " of " +
                        std::to_string(blob_len) + " bytes present");
    }
    p.seg_blob = rd.blob(blob_len);
    if (!rd.done()) throw LengthMismatch("trailing bytes after the blob");
    return p;
}

std::size_t header_span_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFixedHeaderBytes) return bytes.size();
    const std::size_t n_bs = bytes[10];
    // BS records plus the u32 blob length: corrupt framing would make the
    // whole stream unparseable, which defeats the protect_header contract.
    return std::min(bytes.size(), kFixedHeaderBytes + n_bs * kBsRecordBytes + 4);
}

std::vector<std::uint8_t> apply_channel(std::span<const std::uint8_t> bytes,
                                        const ChannelConfig& cfg) {
    if (!(cfg.ber >= 0.0 && cfg.ber < 1.0)) {
        throw LengthMismatch("bit error rate must lie in [0, 1)");
    }
    std::vector<std::uint8_t> out(bytes.begin(), bytes.end());
    if (cfg.ber == 0.0) return out;
    const std::size_t start = cfg.protect_header ? header_span_bytes(bytes) : 0;
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = start; i < out.size(); ++i) {
        for (int bit = 0; bit < 8; ++bit) {
            if (canonical(rng) < cfg.ber) out[i] ^= static_cast<std::uint8_t>(1u << bit);
        }
    }
    return out;
}

double measure_bandwidth(std::span<const std::uint8_t> bytes) {
    return static_cast<double>(bytes.size()) * 8.0 / 1000.0;
}

std::uint64_t raw_baseline_bits(const GridMap& buildings,
                                const SparseObservationSet& samples) {
    return static_cast<std::uint64_t>(buildings.size()) +
           static_cast<std::uint64_t>(samples.size()) * 64;
}

}  // namespace radiosem
