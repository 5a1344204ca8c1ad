#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace hdboot {

/// Hierarchical seed: a master value plus a path of sub-stream indices.
///
/// Every Monte Carlo replicate, bootstrap draw, and CV fold receives its own
/// path, so results do not depend on how work is scheduled across threads.
class RngSeed {
public:
    explicit RngSeed(std::uint64_t master = 0, std::vector<std::uint64_t> path = {});

    [[nodiscard]] RngSeed child(std::uint64_t index) const;

    [[nodiscard]] std::uint64_t master() const noexcept { return master_; }
    [[nodiscard]] const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    /// 64-bit digest of the path; selects the counter range used by the stream.
    [[nodiscard]] std::uint64_t path_key() const noexcept;

    /// "master" or "master/i/j/..."
    [[nodiscard]] std::string to_string() const;
    static RngSeed parse(std::string_view text);

    friend bool operator==(const RngSeed&, const RngSeed&) = default;

private:
    std::uint64_t master_;
    std::vector<std::uint64_t> path_;
};

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream. The key is the seed's master value and the
/// upper half of the 128-bit counter is the path digest; the lower half counts
/// blocks. Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(const RngSeed& seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal (Box-Muller, pairs cached).
    double normal();
    /// Uniform integer in [0, bound), unbiased.
    std::uint64_t below(std::uint64_t bound);

    template <typename Iter>
    void fill_normal(Iter first, Iter last) {
        for (; first != last; ++first) *first = normal();
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t path_key_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;  // number of unused 64-bit halves in buffer_
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Fisher-Yates permutation of 0..n-1 drawn from the given stream.
std::vector<std::size_t> random_permutation(std::size_t n, RngStream& stream);

}  // namespace hdboot
