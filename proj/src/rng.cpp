#include "jumpflow/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jumpflow {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

std::string_view to_string(StreamRole role) {
    switch (role) {
        case StreamRole::wiener: return "wiener";
        case StreamRole::jump_times: return "jump_times";
        case StreamRole::jump_marks: return "jump_marks";
    }
    return "unknown";
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t path_id, StreamRole role)
    : master_seed_(master_seed), path_id_(path_id), role_(role) {}

RngStream make_stream(std::uint64_t master_seed, std::uint64_t path_id, StreamRole role) {
    return RngStream(master_seed, path_id, role);
}

std::array<std::uint32_t, 4> RngStream::block(std::uint64_t block_index) const {
    if (block_index >= kBlockLimit) {
        throw std::out_of_range("RngStream: block index exceeds 2^48");
    }
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block_index),
        static_cast<std::uint32_t>(block_index >> 32) |
            (static_cast<std::uint32_t>(role_) << 16),
        static_cast<std::uint32_t>(path_id_),
        static_cast<std::uint32_t>(path_id_ >> 32),
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(master_seed_),
        static_cast<std::uint32_t>(master_seed_ >> 32),
    };
    return philox4x32(counter, key);
}

std::uint64_t RngStream::word_at(std::uint64_t index) const {
    const auto b = block(index / 2);
    const std::size_t half = 2 * (index % 2);
    return (static_cast<std::uint64_t>(b[half + 1]) << 32) | b[half];
}

double RngStream::uniform_at(std::uint64_t index) const {
    return bits_to_open_unit(word_at(index));
}

double RngStream::normal_at(std::uint64_t index) const {
    const auto b = block(index / 2);
    const double u1 = bits_to_open_unit((static_cast<std::uint64_t>(b[1]) << 32) | b[0]);
    const double u2 = bits_to_open_unit((static_cast<std::uint64_t>(b[3]) << 32) | b[2]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return index % 2 == 0 ? radius * std::cos(angle) : radius * std::sin(angle);
}

RngStream::result_type RngStream::operator()() {
    return word_at(cursor_++);
}

double RngStream::uniform() {
    return bits_to_open_unit((*this)());
}

double RngStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace jumpflow
