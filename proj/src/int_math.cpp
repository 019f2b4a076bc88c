#include "tbg/int_math.hpp"

#include <cstdlib>

namespace tbg {

std::optional<IVec2> solve_exact(const IMat2& m, IVec2 v) {
    const std::int64_t det = m.det();
    if (det == 0) return std::nullopt;
    const IVec2 w = m.adjugate() * v;
    if (w.x % det != 0 || w.y % det != 0) return std::nullopt;
    return IVec2{w.x / det, w.y / det};
}

std::int64_t gcd(std::int64_t a, std::int64_t b) {
    a = std::llabs(a);
    b = std::llabs(b);
    while (b != 0) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Egcd extended_gcd(std::int64_t a, std::int64_t b) {
    std::int64_t old_r = a, r = b;
    std::int64_t old_s = 1, s = 0;
    std::int64_t old_t = 0, t = 1;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        std::int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    if (old_r < 0) return {-old_r, -old_s, -old_t};
    return {old_r, old_s, old_t};
}

}  // namespace tbg
