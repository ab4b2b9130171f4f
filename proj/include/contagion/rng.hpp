#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/random/normal_distribution.hpp>

namespace contagion {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output is a pure function of (key, counter), so any random draw can be
/// addressed directly by (seed, entity index, step) with no shared state.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream tags keep draws for different purposes disjoint under one seed.
enum class StreamTag : std::uint32_t {
    initial_values = 1,
    diffusion = 2,
    limit_sde_initial = 3,
    limit_sde_diffusion = 4,
};

/// A standard normal and an independent uniform in (0,1).
struct Draw {
    double normal;
    double uniform;
};

class PhiloxEngine;

class CounterStream {
public:
    explicit constexpr CounterStream(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Counter words: entity (64 bits), index (48 bits), refill (8), tag (8).
    [[nodiscard]] Philox4x32::Counter block(std::uint64_t entity, std::uint64_t index, StreamTag tag,
                                            std::uint32_t refill = 0) const noexcept {
        return Philox4x32::apply({static_cast<std::uint32_t>(entity),
                                  static_cast<std::uint32_t>(entity >> 32),
                                  static_cast<std::uint32_t>(index),
                                  (static_cast<std::uint32_t>(index >> 32) & 0xffffu) << 16 |
                                      (refill & 0xffu) << 8 | static_cast<std::uint32_t>(tag)},
                                 key_);
    }

    /// Uniform on (0,1) with 53 random bits.
    [[nodiscard]] double uniform(std::uint64_t entity, std::uint64_t index, StreamTag tag) const noexcept {
        const auto b = block(entity, index, tag);
        return to_unit52(b[0], b[1]);
    }

    /// Uniform from the first word, then a ziggurat normal from the rest.
    [[nodiscard]] Draw draw(std::uint64_t entity, std::uint64_t index, StreamTag tag) const;

    // 52 bits so that the half-offset keeps the result strictly below 1.
    static constexpr double to_unit52(std::uint32_t hi, std::uint32_t lo) noexcept {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
    }

    static constexpr double to_unit32(std::uint32_t w) noexcept {
        return (static_cast<double>(w) + 0.5) * 0x1.0p-32;
    }

private:
    Philox4x32::Key key_;
};

/// UniformRandomBitGenerator reading the words of one (entity, index, tag)
/// address in order, moving to the next refill block after four words.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;

    PhiloxEngine(const CounterStream& stream, std::uint64_t entity, std::uint64_t index, StreamTag tag) noexcept
        : stream_(&stream), entity_(entity), index_(index), tag_(tag), words_(stream.block(entity, index, tag)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return 0xffffffffu; }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            words_ = stream_->block(entity_, index_, tag_, ++refill_);
            pos_ = 0;
        }
        return words_[pos_++];
    }

private:
    const CounterStream* stream_;
    std::uint64_t entity_;
    std::uint64_t index_;
    StreamTag tag_;
    Philox4x32::Counter words_;
    std::uint32_t refill_ = 0;
    std::size_t pos_ = 0;
};

inline Draw CounterStream::draw(std::uint64_t entity, std::uint64_t index, StreamTag tag) const {
    PhiloxEngine eng(*this, entity, index, tag);
    const double u = to_unit32(eng());
    return {boost::random::normal_distribution<double>{}(eng), u};
}

}  // namespace contagion
