#pragma once

#include <utility>
#include <vector>

namespace maxops::detail {

/**
 * Monotone-deque sweep shared by the cube-maximum fast paths.
 *
 * Anchors are the multiples of `stride` in [anchor_lo, anchor_hi]; a cube
 * anchored at j covers cells j .. j+width-1 along this axis. For every cell
 * x in [cell_lo, cell_hi] covered by at least one anchor, calls
 * emit(x, best_anchor, best_value) where best maximizes value_at(anchor).
 * Ties keep the smallest anchor, matching the canonical cube order.
 */
template <typename ValueAt, typename Emit>
void sweep_anchor_max(int width, int stride, int anchor_lo, int anchor_hi, int cell_lo,
                      int cell_hi, ValueAt&& value_at, Emit&& emit) {
    if (anchor_hi < anchor_lo) return;
    std::vector<std::pair<int, double>> dq;
    std::size_t head = 0;
    int next = anchor_lo;
    for (int x = cell_lo; x <= cell_hi; ++x) {
        for (; next <= anchor_hi && next <= x; next += stride) {
            const double v = value_at(next);
            while (dq.size() > head && dq.back().second < v) dq.pop_back();
            dq.emplace_back(next, v);
        }
        while (dq.size() > head && dq[head].first < x - width + 1) ++head;
        if (dq.size() > head) emit(x, dq[head].first, dq[head].second);
    }
}

/// Minimum over the cells [l, l+width) for every anchor l (multiple of
/// `stride`, l+width <= n). Appends one value per anchor to `out`.
inline void window_min(const double* v, int n, int width, int stride, std::vector<double>& out) {
    std::vector<std::pair<int, double>> dq;
    std::size_t head = 0;
    int next = 0;
    for (int l = 0; l + width <= n; l += stride) {
        for (; next < l + width; ++next) {
            while (dq.size() > head && dq.back().second >= v[next]) dq.pop_back();
            dq.emplace_back(next, v[next]);
        }
        while (dq.size() > head && dq[head].first < l) ++head;
        out.push_back(dq[head].second);
    }
}

} // namespace maxops::detail
