#ifndef FIG8_SRC_LINSOLVE_HPP
#define FIG8_SRC_LINSOLVE_HPP

#include <cmath>
#include <vector>

#include "fig8/errors.hpp"

namespace fig8::detail {

/// Solve the dense n x n system A x = b in place by Gaussian elimination
/// with partial pivoting. A is row-major, overwritten; b becomes x.
inline void solve_dense(int n, std::vector<double>& A, std::vector<double>& b) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(A[static_cast<size_t>(i * n + col)]) >
                std::abs(A[static_cast<size_t>(piv * n + col)]))
                piv = i;
        if (A[static_cast<size_t>(piv * n + col)] == 0.0)
            throw Error("singular Jacobian in Newton solve");
        if (piv != col) {
            for (int j = 0; j < n; ++j)
                std::swap(A[static_cast<size_t>(col * n + j)], A[static_cast<size_t>(piv * n + j)]);
            std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
        }
        for (int i = col + 1; i < n; ++i) {
            const double f = A[static_cast<size_t>(i * n + col)] / A[static_cast<size_t>(col * n + col)];
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j)
                A[static_cast<size_t>(i * n + j)] -= f * A[static_cast<size_t>(col * n + j)];
            b[static_cast<size_t>(i)] -= f * b[static_cast<size_t>(col)];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= A[static_cast<size_t>(i * n + j)] * b[static_cast<size_t>(j)];
        b[static_cast<size_t>(i)] = s / A[static_cast<size_t>(i * n + i)];
    }
}

}  // namespace fig8::detail

#endif
