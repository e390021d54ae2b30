#include "radiosem/semcomp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <string>

#include "radiosem/rng.hpp"
#include "wire_util.hpp"

namespace radiosem {

// ---- patches ----------------------------------------------------------------

PatchSet patchify(const GridMap& map, int patch) {
    if (patch <= 0 || map.width() % patch != 0 || map.height() % patch != 0) {
        throw IndivisibleDims("map dims " + std::to_string(map.width()) + "x" +
                              std::to_string(map.height()) +
                              " not divisible by patch " + std::to_string(patch));
    }
    PatchSet ps;
    ps.rows = map.height() / patch;
    ps.cols = map.width() / patch;
    ps.patch = patch;
    ps.kind = map.kind();
    ps.patches.reserve(static_cast<std::size_t>(ps.rows) * ps.cols);
    for (int r = 0; r < ps.rows; ++r) {
        for (int c = 0; c < ps.cols; ++c) {
            std::vector<double> z(static_cast<std::size_t>(patch) * patch);
            for (int py = 0; py < patch; ++py) {
                for (int px = 0; px < patch; ++px) {
                    z[static_cast<std::size_t>(py) * patch + px] =
                        map.at(c * patch + px, r * patch + py);
                }
            }
            ps.patches.push_back(std::move(z));
        }
    }
    return ps;
}

GridMap unpatchify(const PatchSet& ps, int width, int height) {
    if (width != ps.cols * ps.patch || height != ps.rows * ps.patch ||
        ps.patches.size() != static_cast<std::size_t>(ps.rows) * ps.cols) {
        throw DimensionMismatch("patch grid does not tile the requested dims");
    }
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (int r = 0; r < ps.rows; ++r) {
        for (int c = 0; c < ps.cols; ++c) {
            const auto& z = ps.patches[static_cast<std::size_t>(r) * ps.cols + c];
            if (z.size() != static_cast<std::size_t>(ps.patch) * ps.patch) {
                throw DimensionMismatch("patch vector has wrong length");
            }
            for (int py = 0; py < ps.patch; ++py) {
                for (int px = 0; px < ps.patch; ++px) {
                    out[static_cast<std::size_t>(r * ps.patch + py) * width +
                        c * ps.patch + px] = z[static_cast<std::size_t>(py) * ps.patch + px];
                }
            }
        }
    }
    return GridMap(width, height, ps.kind, std::move(out));
}

// ---- codebook ----------------------------------------------------------------

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

int nearest_codeword(std::span<const double> z, const Codebook& cb) {
    if (z.size() != static_cast<std::size_t>(cb.L)) {
        throw DimensionMismatch("latent length " + std::to_string(z.size()) +
                                " vs codeword dimension " + std::to_string(cb.L));
    }
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < cb.n; ++j) {
        const double d = sq_dist(z, cb.codeword(j));
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

Codebook train_codebook(const std::vector<std::vector<double>>& latents, int n,
                        int iters, std::uint64_t seed) {
    if (n < 1) throw TooFewDistinctLatents("codebook size must be at least 1");
    if (latents.empty()) throw TooFewDistinctLatents("no latent vectors");
    const std::size_t L = latents[0].size();
    for (const auto& z : latents) {
        if (z.size() != L) throw DimensionMismatch("latent vectors differ in length");
    }
    {
        std::set<std::vector<double>> distinct(latents.begin(), latents.end());
        if (distinct.size() < static_cast<std::size_t>(n)) {
            throw TooFewDistinctLatents(std::to_string(distinct.size()) +
                                        " distinct latents for n = " + std::to_string(n));
        }
    }

    const std::size_t m = latents.size();
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centers;
    centers.reserve(n);

    // k-means++ seeding: first center uniform, then proportional to the
    // squared distance to the nearest chosen center.
    centers.push_back(latents[bounded(rng, m)]);
    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) d2[i] = sq_dist(latents[i], centers[0]);
    while (centers.size() < static_cast<std::size_t>(n)) {
        double total = 0.0;
        for (double d : d2) total += d;
        const double r = canonical(rng) * total;
        double cum = 0.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < m; ++i) {
            cum += d2[i];
            if (r < cum) {
                pick = i;
                break;
            }
        }
        centers.push_back(latents[pick]);
        for (std::size_t i = 0; i < m; ++i) {
            d2[i] = std::min(d2[i], sq_dist(latents[i], centers.back()));
        }
    }

    std::vector<int> assign(m, 0);
    for (int iter = 0; iter < iters; ++iter) {
        // Assignment, ties to the smallest index.
        for (std::size_t i = 0; i < m; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                const double d = sq_dist(latents[i], centers[j]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            assign[i] = best;
        }
        // Give an empty cluster the latent farthest from its current center.
        std::vector<std::size_t> counts(n, 0);
        for (int a : assign) ++counts[a];
        for (int j = 0; j < n; ++j) {
            if (counts[j] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < m; ++i) {
                if (counts[assign[i]] <= 1) continue;  // do not empty another cluster
                const double d = sq_dist(latents[i], centers[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[assign[far]];
            assign[far] = j;
            counts[j] = 1;
            centers[j] = latents[far];
        }
        // Centroid update.
        std::vector<std::vector<double>> sums(n, std::vector<double>(L, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < L; ++k) sums[assign[i]][k] += latents[i][k];
        }
        for (int j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < L; ++k) {
                centers[j][k] = sums[j][k] / static_cast<double>(counts[j]);
            }
        }
    }

    // Post-training dedup: identical codewords collapse the index space, so
    // replace duplicates with the latents worst served by the codebook.
    for (int j = 1; j < n; ++j) {
        bool dup = false;
        for (int i = 0; i < j; ++i) {
            if (centers[i] == centers[j]) {
                dup = true;
                break;
            }
        }
        if (!dup) continue;
        std::size_t far = m;  // sentinel
        double far_d = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            bool taken = false;
            double near_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < n; ++c) {
                const double d = sq_dist(latents[i], centers[c]);
                near_d = std::min(near_d, d);
                if (d == 0.0) taken = true;
            }
            if (!taken && near_d > far_d) {
                far_d = near_d;
                far = i;
            }
        }
        if (far < m) centers[j] = latents[far];
    }

    Codebook cb;
    cb.n = n;
    cb.L = static_cast<int>(L);
    cb.codewords.reserve(static_cast<std::size_t>(n) * L);
    for (const auto& c : centers) {
        cb.codewords.insert(cb.codewords.end(), c.begin(), c.end());
    }
    return cb;
}

VqEncoding vq_encode(const PatchSet& ps, const Codebook& cb) {
    VqEncoding enc;
    enc.rows = ps.rows;
    enc.cols = ps.cols;
    enc.patch = ps.patch;
    enc.indices.reserve(ps.patches.size());
    for (const auto& z : ps.patches) {
        enc.indices.push_back(static_cast<std::uint16_t>(nearest_codeword(z, cb)));
    }
    return enc;
}

GridMap vq_decode(const VqEncoding& enc, const Codebook& cb) {
    if (enc.indices.size() != static_cast<std::size_t>(enc.rows) * enc.cols) {
        throw DimensionMismatch("index count does not match the latent grid");
    }
    if (cb.L != enc.patch * enc.patch) {
        throw DimensionMismatch("codeword dimension does not match the patch size");
    }
    PatchSet ps;
    ps.rows = enc.rows;
    ps.cols = enc.cols;
    ps.patch = enc.patch;
    ps.kind = MapKind::PowerDbm;  // raw codeword values, binarized below
    ps.patches.reserve(enc.indices.size());
    for (std::uint16_t k : enc.indices) {
        if (k >= cb.n) {
            throw IndexOutOfRange("codeword index " + std::to_string(k) +
                                  " out of range for n = " + std::to_string(cb.n));
        }
        const auto w = cb.codeword(k);
        ps.patches.emplace_back(w.begin(), w.end());
    }
    const GridMap raw = unpatchify(ps, enc.cols * enc.patch, enc.rows * enc.patch);
    std::vector<double> bits(raw.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = raw.values()[i] >= 0.5 ? 1.0 : 0.0;
    }
    return GridMap(raw.width(), raw.height(), MapKind::Binary, std::move(bits));
}

int vq_index_bits(int n_codewords) {
    int bits = 0;
    while ((1 << bits) < n_codewords) ++bits;
    return bits;
}

std::vector<std::uint8_t> pack_vq_blob(const VqEncoding& enc, int n_codewords) {
    const int bits = vq_index_bits(n_codewords);
    std::vector<std::uint8_t> out;
    out.reserve((enc.indices.size() * bits + 7) / 8);
    std::uint32_t acc = 0;
    int acc_bits = 0;
    for (std::uint16_t idx : enc.indices) {
        if (idx >= n_codewords) {
            throw IndexOutOfRange("index " + std::to_string(idx) + " needs more than " +
                                  std::to_string(bits) + " bits");
        }
        acc = (acc << bits) | idx;
        acc_bits += bits;
        while (acc_bits >= 8) {
            out.push_back(static_cast<std::uint8_t>(acc >> (acc_bits - 8)));
            acc_bits -= 8;
            acc &= (1u << acc_bits) - 1;
        }
    }
    if (acc_bits > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - acc_bits)));
    if (out.empty()) out.push_back(0);  // payload blobs must be non-empty
    return out;
}

VqEncoding unpack_vq_blob(std::span<const std::uint8_t> blob, int n_codewords,
                          int patch, int width, int height) {
    if (patch <= 0 || width % patch != 0 || height % patch != 0) {
        throw IndivisibleDims("dims not divisible by the patch size");
    }
    VqEncoding enc;
    enc.rows = height / patch;
    enc.cols = width / patch;
    enc.patch = patch;
    const int bits = vq_index_bits(n_codewords);
    const std::size_t count = static_cast<std::size_t>(enc.rows) * enc.cols;
    const std::size_t expected = std::max<std::size_t>(1, (count * bits + 7) / 8);
    if (blob.size() != expected) {
        throw LengthMismatch("vq blob is " + std::to_string(blob.size()) +
                             " bytes, expected " + std::to_string(expected));
    }
    enc.indices.reserve(count);
    std::uint32_t acc = 0;
    int acc_bits = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < count; ++i) {
        while (acc_bits < bits) {
            acc = (acc << 8) | blob[pos++];
            acc_bits += 8;
        }
        const std::uint16_t idx =
            bits == 0 ? 0 : static_cast<std::uint16_t>((acc >> (acc_bits - bits)) &
                                                       ((1u << bits) - 1));
        acc_bits -= bits;
        if (idx >= n_codewords) {
            throw IndexOutOfRange("packed index " + std::to_string(idx) +
                                  " out of range for n = " + std::to_string(n_codewords));
        }
        enc.indices.push_back(idx);
    }
    return enc;
}

// ---- DCT --------------------------------------------------------------------

namespace {

struct DctBasis {
    // basis[k][n] = a_k cos(pi (2n+1) k / 16), orthonormal rows.
    double m[8][8];
    DctBasis() {
        const double pi = 3.14159265358979323846;
        for (int k = 0; k < 8; ++k) {
            const double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int n = 0; n < 8; ++n) {
                m[k][n] = a * std::cos(pi * (2 * n + 1) * k / 16.0);
            }
        }
    }
};

const DctBasis kDct;

}  // namespace

Block8 dct_block_forward(const Block8& block) {
    // rows then columns: F = M X M^T
    Block8 tmp{}, out{};
    for (int y = 0; y < 8; ++y) {
        for (int k = 0; k < 8; ++k) {
            double s = 0.0;
            for (int x = 0; x < 8; ++x) s += kDct.m[k][x] * block[y * 8 + x];
            tmp[y * 8 + k] = s;
        }
    }
    for (int k = 0; k < 8; ++k) {
        for (int u = 0; u < 8; ++u) {
            double s = 0.0;
            for (int y = 0; y < 8; ++y) s += kDct.m[u][y] * tmp[y * 8 + k];
            out[u * 8 + k] = s;
        }
    }
    return out;
}

Block8 dct_block_inverse(const Block8& coefficients) {
    Block8 tmp{}, out{};
    for (int u = 0; u < 8; ++u) {
        for (int x = 0; x < 8; ++x) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k) s += kDct.m[k][x] * coefficients[u * 8 + k];
            tmp[u * 8 + x] = s;
        }
    }
    for (int x = 0; x < 8; ++x) {
        for (int y = 0; y < 8; ++y) {
            double s = 0.0;
            for (int u = 0; u < 8; ++u) s += kDct.m[u][y] * tmp[u * 8 + x];
            out[y * 8 + x] = s;
        }
    }
    return out;
}

// ---- JPEG-style codec ---------------------------------------------------------

namespace {

// Standard JPEG luminance quantization table (Annex K), zig-zag source order
// is row-major here.
constexpr int kLumaTable[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr int kZigzag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,   //
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,  //
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,  //
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

// Binary segmentation carries far less information than a photograph, so the
// quality curve quantizes 16x harder than baseline JPEG at the same q.
constexpr double kBinaryBoost = 32.0;
constexpr double kPixelScale = 255.0;

void check_quality(int quality) {
    if (quality < 1 || quality > 100) {
        throw CorruptStream("quality " + std::to_string(quality) +
                            " outside [1, 100]");
    }
}

}  // namespace

std::array<int, 64> jpeg_quant_steps(int quality) {
    check_quality(quality);
    const double factor =
        (quality < 50 ? 5000.0 / quality : 200.0 - 2.0 * quality) * kBinaryBoost;
    std::array<int, 64> steps{};
    for (int i = 0; i < 64; ++i) {
        const double s = std::floor((kLumaTable[i] * factor + 50.0) / 100.0);
        steps[i] = static_cast<int>(std::clamp(s, 1.0, 32767.0));
    }
    return steps;
}

std::vector<std::uint8_t> jpeg_encode_binary(const GridMap& map, int quality) {
    check_quality(quality);
    if (map.kind() != MapKind::Binary) {
        throw InvalidGrid("jpeg_encode_binary expects a binary map");
    }
    if (map.width() % 8 != 0 || map.height() % 8 != 0) {
        throw IndivisibleDims("map dims must be divisible by 8");
    }
    const auto steps = jpeg_quant_steps(quality);
    const int bw = map.width() / 8;
    const int bh = map.height() / 8;

    // Quantized coefficients, zig-zag per block, DC replaced by its DPCM
    // difference, concatenated over blocks in raster order.
    std::vector<std::int64_t> seq;
    seq.reserve(static_cast<std::size_t>(bw) * bh * 64);
    std::int64_t prev_dc = 0;
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            Block8 block{};
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    block[y * 8 + x] = map.at(bx * 8 + x, by * 8 + y) * kPixelScale;
                }
            }
            const Block8 coef = dct_block_forward(block);
            std::array<std::int64_t, 64> q{};
            for (int i = 0; i < 64; ++i) q[i] = std::llround(coef[i] / steps[i]);
            seq.push_back(q[0] - prev_dc);
            prev_dc = q[0];
            for (int i = 1; i < 64; ++i) seq.push_back(q[kZigzag[i]]);
        }
    }

    // Run-length of zeros across the whole sequence; trailing zeros implicit.
    // Each (run, value) pair packs into one varint: the low 4 bits carry the
    // zigzag-coded value (15 = escape to a second varint), the rest the run.
    std::vector<std::pair<std::uint64_t, std::int64_t>> pairs;
    std::uint64_t run = 0;
    for (std::int64_t v : seq) {
        if (v == 0) {
            ++run;
        } else {
            pairs.emplace_back(run, v);
            run = 0;
        }
    }

    std::vector<std::uint8_t> out;
    out.reserve(16 + pairs.size() * 2);
    out.insert(out.end(), {'R', 'S', 'J', 'B'});
    wire::put_u8(out, static_cast<std::uint8_t>(quality));
    wire::put_u16(out, static_cast<std::uint16_t>(map.width()));
    wire::put_u16(out, static_cast<std::uint16_t>(map.height()));
    wire::put_u32(out, static_cast<std::uint32_t>(pairs.size()));
    for (const auto& [r, v] : pairs) {
        const std::uint64_t zz = wire::zigzag(v);
        if (zz < 15) {
            wire::put_varint(out, (r << 4) | zz);
        } else {
            wire::put_varint(out, (r << 4) | 15);
            wire::put_varint(out, zz - 15);
        }
    }
    return out;
}

GridMap jpeg_decode_binary(std::span<const std::uint8_t> bytes) {
    try {
        wire::Reader rd(bytes);
        rd.expect_magic("RSJB");
        const int quality = rd.u8();
        check_quality(quality);
        const int w = rd.u16();
        const int h = rd.u16();
        if (w == 0 || h == 0 || w % 8 != 0 || h % 8 != 0) {
            throw CorruptStream("stream dims " + std::to_string(w) + "x" +
                                std::to_string(h) + " invalid");
        }
        const std::uint32_t n_pairs = rd.u32();
        const std::size_t capacity = static_cast<std::size_t>(w) * h;

        std::vector<std::int64_t> seq(capacity, 0);
        std::size_t pos = 0;
        for (std::uint32_t p = 0; p < n_pairs; ++p) {
            const std::uint64_t token = rd.varint();
            const std::uint64_t run = token >> 4;
            std::uint64_t zz = token & 15;
            if (zz == 15) zz = rd.varint() + 15;
            const std::int64_t value = wire::unzigzag(zz);
            if (run >= capacity - pos) {
                throw CorruptStream("run length overruns the coefficient budget");
            }
            pos += run;
            seq[pos++] = value;
        }
        if (!rd.done()) {
            throw CorruptStream("trailing bytes after the final pair");
        }

        const auto steps = jpeg_quant_steps(quality);
        const int bw = w / 8;
        const int bh = h / 8;
        std::vector<double> pixels(capacity, 0.0);
        std::int64_t prev_dc = 0;
        std::size_t at = 0;
        for (int by = 0; by < bh; ++by) {
            for (int bx = 0; bx < bw; ++bx) {
                std::array<std::int64_t, 64> q{};
                q[0] = prev_dc + seq[at++];
                prev_dc = q[0];
                for (int i = 1; i < 64; ++i) q[kZigzag[i]] = seq[at++];
                Block8 coef{};
                for (int i = 0; i < 64; ++i) {
                    coef[i] = static_cast<double>(q[i]) * steps[i];
                }
                const Block8 block = dct_block_inverse(coef);
                for (int y = 0; y < 8; ++y) {
                    for (int x = 0; x < 8; ++x) {
                        pixels[static_cast<std::size_t>(by * 8 + y) * w + bx * 8 + x] =
                            block[y * 8 + x] / kPixelScale >= 0.5 ? 1.0 : 0.0;
                    }
                }
            }
        }
        return GridMap(w, h, MapKind::Binary, std::move(pixels));
    } catch (const CorruptStream&) {
        throw;
    } catch (const Error& e) {
        throw CorruptStream(e.what());
    }
}

std::uint64_t payload_bits(const VqEncoding& enc, int n_codewords) {
    return static_cast<std::uint64_t>(enc.indices.size()) * vq_index_bits(n_codewords);
}

std::uint64_t payload_bits(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint64_t>(bytes.size()) * 8;
}

// ---- codebook I/O -------------------------------------------------------------

std::vector<std::uint8_t> codebook_to_bytes(const Codebook& cb) {
    if (cb.n < 1 || cb.L < 1 ||
        cb.codewords.size() != static_cast<std::size_t>(cb.n) * cb.L) {
        throw DimensionMismatch("codebook fields are inconsistent");
    }
    std::vector<std::uint8_t> out;
    out.reserve(9 + cb.codewords.size() * 4);
    out.insert(out.end(), {'R', 'S', 'C', 'B'});
    wire::put_u8(out, 1);
    wire::put_u16(out, static_cast<std::uint16_t>(cb.n));
    wire::put_u16(out, static_cast<std::uint16_t>(cb.L));
    for (double v : cb.codewords) wire::put_f32(out, static_cast<float>(v));
    return out;
}

Codebook codebook_from_bytes(std::span<const std::uint8_t> bytes) {
    wire::Reader rd(bytes);
    rd.expect_magic("RSCB");
    const std::uint8_t version = rd.u8();
    if (version != 1) {
        throw UnsupportedVersion("codebook version " + std::to_string(version));
    }
    Codebook cb;
    cb.n = rd.u16();
    cb.L = rd.u16();
    if (cb.n < 1 || cb.L < 1) throw LengthMismatch("codebook dims must be positive");
    cb.codewords.reserve(static_cast<std::size_t>(cb.n) * cb.L);
    for (int i = 0; i < cb.n * cb.L; ++i) cb.codewords.push_back(rd.f32());
    if (!rd.done()) throw LengthMismatch("trailing bytes after codewords");
    return cb;
}

void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
    const auto bytes = codebook_to_bytes(cb);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return codebook_from_bytes(bytes);
}

}  // namespace radiosem
