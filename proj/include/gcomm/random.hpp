#ifndef GCOMM_RANDOM_HPP
#define GCOMM_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace gcomm {

/// Master seed of an experiment. Identical seed and configuration give
/// bit-identical draws.
struct RngSeed
{
    std::uint64_t seed = 0;
};

/// Independent noise sources. Each role gets its own stream so that changing
/// how one source is consumed never shifts the draws of another.
enum class StreamRole
{
    Process,
    Measurement,
    Channel,
    Baseline
};

constexpr std::string_view role_label(StreamRole role)
{
    switch (role) {
        case StreamRole::Process:
            return "process";
        case StreamRole::Measurement:
            return "measurement";
        case StreamRole::Channel:
            return "channel";
        case StreamRole::Baseline:
            return "baseline";
    }
    return "";
}

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Stream splitting rule:
///   role_seed  = splitmix64(master ^ fnv1a64(label))
///   block_seed = splitmix64(role_seed + block)
/// The block index lets Monte Carlo work be cut into fixed chunks whose draws
/// do not depend on how many threads process them.
constexpr std::uint64_t stream_seed(RngSeed master, StreamRole role, std::uint64_t block = 0)
{
    const std::uint64_t role_seed = splitmix64(master.seed ^ fnv1a64(role_label(role)));
    return splitmix64(role_seed + block);
}

/// Standard normal draws: mt19937_64 bits, 53-bit uniforms, Box-Muller pairs.
class NormalStream
{
  public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
    NormalStream(RngSeed master, StreamRole role, std::uint64_t block = 0)
        : engine_(stream_seed(master, role, block))
    {
    }

    double operator()()
    {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        constexpr double scale = 0x1.0p-53;
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * scale;
        const double u2 = static_cast<double>(engine_() >> 11) * scale;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        hasSpare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

} // namespace gcomm

#endif // GCOMM_RANDOM_HPP
