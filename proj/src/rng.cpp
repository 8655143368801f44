#include "hypatk/rng.hpp"

namespace hypatk::rng {

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ull);
    for (std::uint64_t part : path) {
        h = mix64(h ^ mix64(part + 0x9E3779B97F4A7C15ull));
    }
    return h;
}

}  // namespace hypatk::rng
