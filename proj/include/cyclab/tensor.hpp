#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cyclab {

// Dense row-major (t, r, c) tensor of doubles.
struct Tensor3 {
    int t = 0, r = 0, c = 0;
    std::vector<double> v;

    Tensor3() = default;
    Tensor3(int t_, int r_, int c_, double fill = 0.0)
        : t(t_), r(r_), c(c_), v(static_cast<size_t>(t_) * r_ * c_, fill) {}

    double& operator()(int ti, int i, int j) {
        return v[(static_cast<size_t>(ti) * r + i) * c + j];
    }
    double operator()(int ti, int i, int j) const {
        return v[(static_cast<size_t>(ti) * r + i) * c + j];
    }
    size_t size() const { return v.size(); }
    bool same_shape(const Tensor3& o) const { return t == o.t && r == o.r && c == o.c; }
};

// Dense row-major (t, d, r, c) tensor of doubles.
struct Tensor4 {
    int t = 0, d = 0, r = 0, c = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(int t_, int d_, int r_, int c_, double fill = 0.0)
        : t(t_), d(d_), r(r_), c(c_),
          v(static_cast<size_t>(t_) * d_ * r_ * c_, fill) {}

    double& operator()(int ti, int di, int i, int j) {
        return v[((static_cast<size_t>(ti) * d + di) * r + i) * c + j];
    }
    double operator()(int ti, int di, int i, int j) const {
        return v[((static_cast<size_t>(ti) * d + di) * r + i) * c + j];
    }
    size_t size() const { return v.size(); }
    bool same_shape(const Tensor4& o) const {
        return t == o.t && d == o.d && r == o.r && c == o.c;
    }
};

inline void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

}  // namespace cyclab
