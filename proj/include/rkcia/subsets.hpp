#ifndef RKCIA_SUBSETS_HPP
#define RKCIA_SUBSETS_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "rkcia/graph.hpp"

namespace rkcia {

/// Visits subsets of `items` by ascending size 0..max_size, lexicographic
/// by position within a size. Stops at the first subset for which
/// `visit` returns true and returns it.
template <typename Visit>
std::optional<NodeSet> first_subset(const NodeSet& items, std::size_t max_size, Visit&& visit) {
    const std::size_t n = items.size();
    max_size = std::min(max_size, n);
    NodeSet subset;
    std::vector<std::size_t> pos;
    for (std::size_t size = 0; size <= max_size; ++size) {
        pos.resize(size);
        for (std::size_t i = 0; i < size; ++i)
            pos[i] = i;
        while (true) {
            subset.clear();
            for (std::size_t p : pos)
                subset.push_back(items[p]);
            if (visit(static_cast<const NodeSet&>(subset)))
                return subset;
            // next combination
            std::size_t i = size;
            while (i > 0 && pos[i - 1] == n - size + i - 1)
                --i;
            if (i == 0)
                break;
            ++pos[i - 1];
            for (std::size_t j = i; j < size; ++j)
                pos[j] = pos[j - 1] + 1;
        }
    }
    return std::nullopt;
}

inline NodeSet set_minus(const NodeSet& s, std::initializer_list<NodeId> drop) {
    NodeSet out;
    for (NodeId v : s)
        if (std::find(drop.begin(), drop.end(), v) == drop.end())
            out.push_back(v);
    return out;
}

}  // namespace rkcia

#endif
