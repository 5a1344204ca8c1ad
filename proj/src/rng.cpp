#include "hdboot/rng.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace hdboot {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw std::invalid_argument("invalid seed component '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

RngSeed::RngSeed(std::uint64_t master, std::vector<std::uint64_t> path)
    : master_(master), path_(std::move(path)) {}

RngSeed RngSeed::child(std::uint64_t index) const {
    auto path = path_;
    path.push_back(index);
    return RngSeed(master_, std::move(path));
}

std::uint64_t RngSeed::path_key() const noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (const auto index : path_) {
        h = splitmix64(h ^ splitmix64(index ^ 0xA5A5A5A5A5A5A5A5ULL));
    }
    return h;
}

std::string RngSeed::to_string() const {
    std::string out = std::to_string(master_);
    for (const auto index : path_) {
        out += '/';
        out += std::to_string(index);
    }
    return out;
}

RngSeed RngSeed::parse(std::string_view text) {
    std::vector<std::uint64_t> parts;
    std::size_t start = 0;
    while (true) {
        const auto slash = text.find('/', start);
        parts.push_back(parse_u64(text.substr(start, slash == std::string_view::npos ? slash : slash - start)));
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    const auto master = parts.front();
    parts.erase(parts.begin());
    return RngSeed(master, std::move(parts));
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53U;
    constexpr std::uint32_t kM1 = 0xCD9E8D57U;
    constexpr std::uint32_t kW0 = 0x9E3779B9U;
    constexpr std::uint32_t kW1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo32(kM0, ctr[0], hi0, lo0);
        mulhilo32(kM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

RngStream::RngStream(const RngSeed& seed)
    : key_{static_cast<std::uint32_t>(seed.master()), static_cast<std::uint32_t>(seed.master() >> 32)},
      path_key_(seed.path_key()) {}

std::uint64_t RngStream::next_u64() {
    if (buffered_ == 0) {
        buffer_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              static_cast<std::uint32_t>(path_key_), static_cast<std::uint32_t>(path_key_ >> 32)},
                             key_);
        ++block_;
        buffered_ = 2;
    }
    const int offset = (2 - buffered_) * 2;
    --buffered_;
    return (static_cast<std::uint64_t>(buffer_[offset + 1]) << 32) | buffer_[offset];
}

double RngStream::uniform() {
    constexpr double kScale = 0x1.0p-53;
    return (static_cast<double>(next_u64() >> 11) + 0.5) * kScale;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

__extension__ typedef unsigned __int128 uint128;

std::uint64_t RngStream::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RngStream::below: bound must be positive");
    // Lemire's nearly-divisionless method.
    uint128 m = static_cast<uint128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<uint128>(next_u64()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::size_t> random_permutation(std::size_t n, RngStream& stream) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(stream.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace hdboot
