#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace jumpflow {

/// Which part of a path's noise a stream feeds.
enum class StreamRole : std::uint16_t { wiener = 0, jump_times = 1, jump_marks = 2 };

std::string_view to_string(StreamRole role);

/// Philox4x32-10 block function (Salmon et al., SC'11). Maps a 128-bit
/// counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/*
 * Counter-based random stream addressed by (master_seed, path_id, role).
 *
 * The key is the master seed; the counter packs the block index (48 bits),
 * the role (16 bits) and the path id (64 bits). Distinct triples therefore
 * address disjoint counter spaces of the same bijection, and every draw can
 * be recomputed from its index alone.
 *
 * Two access modes are offered. The *_at(i) functions are pure random
 * access. The sequential functions advance an internal word cursor and are
 * what samplers that consume a variable number of draws use. Block indices
 * at or above `kAuxBlockOffset` are reserved for auxiliary random-access
 * draws (Brownian splitting, small-jump Gaussians) so they never alias the
 * sequential region.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t kBlockLimit = std::uint64_t{1} << 48;
    static constexpr std::uint64_t kAuxBlockOffset = std::uint64_t{1} << 46;

    RngStream(std::uint64_t master_seed, std::uint64_t path_id, StreamRole role);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t path_id() const { return path_id_; }
    StreamRole role() const { return role_; }

    /// 64-bit word number `index` of the stream (two words per block).
    std::uint64_t word_at(std::uint64_t index) const;
    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform_at(std::uint64_t index) const;
    /// Standard normal number `index`; the pair (2j, 2j+1) is one
    /// Box-Muller transform of block j.
    double normal_at(std::uint64_t index) const;

    // Sequential interface; satisfies UniformRandomBitGenerator.
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();
    double uniform();
    double normal();

    /// Words consumed so far by the sequential interface.
    std::uint64_t position() const { return cursor_; }
    void rewind() { cursor_ = 0; }

    friend bool operator==(const RngStream& a, const RngStream& b) {
        return a.master_seed_ == b.master_seed_ && a.path_id_ == b.path_id_ &&
               a.role_ == b.role_ && a.cursor_ == b.cursor_;
    }

private:
    std::array<std::uint32_t, 4> block(std::uint64_t block_index) const;

    std::uint64_t master_seed_;
    std::uint64_t path_id_;
    StreamRole role_;
    std::uint64_t cursor_ = 0;
};

RngStream make_stream(std::uint64_t master_seed, std::uint64_t path_id, StreamRole role);

/// Converts 64 random bits to a double in (0, 1).
inline double bits_to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace jumpflow
