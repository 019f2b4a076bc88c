#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>

namespace tbg {

struct IVec2 {
    std::int64_t x = 0;
    std::int64_t y = 0;

    auto operator<=>(const IVec2&) const = default;
};

constexpr IVec2 operator+(IVec2 u, IVec2 v) { return {u.x + v.x, u.y + v.y}; }
constexpr IVec2 operator-(IVec2 u, IVec2 v) { return {u.x - v.x, u.y - v.y}; }
constexpr IVec2 operator-(IVec2 u) { return {-u.x, -u.y}; }
constexpr IVec2 operator*(std::int64_t s, IVec2 u) { return {s * u.x, s * u.y}; }

inline std::ostream& operator<<(std::ostream& os, IVec2 v) {
    return os << '(' << v.x << ',' << v.y << ')';
}

// [[a, b], [c, d]]
struct IMat2 {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    bool operator==(const IMat2&) const = default;

    constexpr std::int64_t det() const { return a * d - b * c; }
    constexpr IMat2 adjugate() const { return {d, -b, -c, a}; }
    static constexpr IMat2 identity() { return {1, 0, 0, 1}; }
};

constexpr IVec2 operator*(const IMat2& m, IVec2 v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

constexpr IMat2 operator*(const IMat2& m, const IMat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

inline std::ostream& operator<<(std::ostream& os, const IMat2& m) {
    return os << "[[" << m.a << ',' << m.b << "],[" << m.c << ',' << m.d << "]]";
}

// Integer x with m*x = v, if one exists. Exact via adjugate / determinant.
std::optional<IVec2> solve_exact(const IMat2& m, IVec2 v);

std::int64_t gcd(std::int64_t a, std::int64_t b);

struct Egcd {
    std::int64_t g, x, y;  // a*x + b*y = g
};

Egcd extended_gcd(std::int64_t a, std::int64_t b);

// floor division, correct for negative numerators
constexpr std::int64_t floor_div(std::int64_t n, std::int64_t d) {
    std::int64_t q = n / d;
    if ((n % d != 0) && ((n < 0) != (d < 0))) --q;
    return q;
}

}  // namespace tbg
