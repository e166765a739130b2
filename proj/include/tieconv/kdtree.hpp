#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace tieconv {

/// k-d tree over a flat row-major point array. Queries order candidates by
/// (squared distance, point index), so equidistant ties always resolve to the
/// lowest index.
class KdTree {
public:
    KdTree(const double* points, std::size_t n, int dim) : pts_(points), n_(n), dim_(dim) {
        if (n == 0 || dim <= 0) throw std::invalid_argument("KdTree: empty input");
        order_.resize(n);
        for (std::size_t i = 0; i < n; ++i) order_[i] = i;
        nodes_.reserve(2 * n);
        root_ = build(0, n, 0);
    }

    struct Hit {
        double dist2;
        std::size_t index;
        bool operator<(const Hit& o) const {
            return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
        }
    };

    /// k nearest points to `q` (including any point equal to q), ascending.
    std::vector<Hit> nearest(std::span<const double> q, std::size_t k) const {
        std::vector<Hit> heap;  // max-heap on (dist2, index)
        heap.reserve(k + 1);
        search(root_, q, k, heap);
        std::sort_heap(heap.begin(), heap.end());
        return heap;
    }

private:
    struct Node {
        std::size_t point;
        int axis;
        std::int32_t left = -1, right = -1;
    };

    std::int32_t build(std::size_t lo, std::size_t hi, int depth) {
        if (lo >= hi) return -1;
        const int axis = depth % dim_;
        const std::size_t mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](std::size_t a, std::size_t b) {
                             const double ca = pts_[a * dim_ + axis], cb = pts_[b * dim_ + axis];
                             return ca != cb ? ca < cb : a < b;
                         });
        const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(Node{order_[mid], axis, -1, -1});
        const std::int32_t l = build(lo, mid, depth + 1);
        const std::int32_t r = build(mid + 1, hi, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    void search(std::int32_t id, std::span<const double> q, std::size_t k,
                std::vector<Hit>& heap) const {
        if (id < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        const double* p = pts_ + node.point * dim_;
        double d2 = 0;
        for (int j = 0; j < dim_; ++j) {
            const double dx = q[j] - p[j];
            d2 += dx * dx;
        }
        const Hit cand{d2, node.point};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
        }
        const double delta = q[node.axis] - p[node.axis];
        const std::int32_t near = delta < 0 ? node.left : node.right;
        const std::int32_t far = delta < 0 ? node.right : node.left;
        search(near, q, k, heap);
        if (heap.size() < k || delta * delta <= heap.front().dist2) search(far, q, k, heap);
    }

    const double* pts_;
    std::size_t n_;
    int dim_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace tieconv
