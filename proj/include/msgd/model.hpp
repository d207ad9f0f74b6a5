#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "msgd/rng.hpp"
#include "msgd/support.hpp"

namespace msgd {

/// Thrown when a requested enumeration has more maximal generator sets than
/// the caller's budget allows. Carries the exact count.
class EnumerationBudgetExceeded : public std::runtime_error {
public:
    EnumerationBudgetExceeded(std::uint64_t count, std::uint64_t cap, const std::string& hint = "")
        : std::runtime_error("enumeration budget exceeded: " + std::to_string(count) +
                             " maximal generator sets > cap " + std::to_string(cap) + hint),
          count(count),
          cap(cap) {}

    std::uint64_t count;
    std::uint64_t cap;
};

/// min(C(n,k), UINT64_MAX), exact below the saturation point.
inline std::uint64_t binomial_saturating(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
        if (r > std::numeric_limits<std::uint64_t>::max())
            return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

/// All k-subsets of [0,n) in lexicographic order.
inline std::vector<Support> k_subsets(int n, int k) {
    std::vector<Support> out;
    if (k < 0 || k > n) return out;
    std::vector<int> c(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.emplace_back(c);
        int i = k - 1;
        while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++c[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// Drop every set that is contained in another, collapse duplicates, and sort
/// lexicographically. Result generates the same sparsity model.
inline std::vector<Support> canonicalize_family(std::vector<Support> supports) {
    std::sort(supports.begin(), supports.end());
    supports.erase(std::unique(supports.begin(), supports.end()), supports.end());
    std::vector<Support> out;
    out.reserve(supports.size());
    for (std::size_t i = 0; i < supports.size(); ++i) {
        bool subsumed = false;
        for (std::size_t j = 0; j < supports.size() && !subsumed; ++j)
            if (j != i && supports[i].is_subset_of(supports[j]) && supports[i] != supports[j])
                subsumed = true;
        if (!subsumed) out.push_back(supports[i]);
    }
    return out;
}

struct PlainK {
    int k = 1;
};

struct DisjointGroups {
    std::vector<Support> cells;  // partition of [0,p), sorted by first element
    int g_active = 1;
};

struct ExplicitFamily {
    std::vector<Support> generators;  // canonical: maximal-only, lex sorted
};

/// Combinatorial sparsity model: the family of admissible supports is the
/// union of power sets of its generator sets. Immutable after construction.
class SparsityModel {
public:
    using Kind = std::variant<PlainK, DisjointGroups, ExplicitFamily>;

    static SparsityModel plain(int p, int k) {
        check_dim(p);
        if (k < 1 || k > p) throw std::invalid_argument("PlainK: need 1 <= k <= p");
        return SparsityModel(p, k, PlainK{k});
    }

    static SparsityModel disjoint_groups(int p, std::vector<Support> cells, int g_active) {
        check_dim(p);
        if (cells.empty()) throw std::invalid_argument("DisjointGroups: empty partition");
        std::vector<bool> seen(static_cast<std::size_t>(p), false);
        for (const Support& c : cells) {
            if (c.empty()) throw std::invalid_argument("DisjointGroups: empty cell");
            for (int i : c) {
                if (i >= p) throw std::invalid_argument("DisjointGroups: index out of range");
                if (seen[static_cast<std::size_t>(i)])
                    throw std::invalid_argument("DisjointGroups: cells overlap");
                seen[static_cast<std::size_t>(i)] = true;
            }
        }
        for (bool b : seen)
            if (!b) throw std::invalid_argument("DisjointGroups: cells must cover [0,p)");
        if (g_active < 1 || g_active > static_cast<int>(cells.size()))
            throw std::invalid_argument("DisjointGroups: need 1 <= g_active <= #cells");
        // Canonical cell order: by smallest element (cells are disjoint).
        std::sort(cells.begin(), cells.end(),
                  [](const Support& a, const Support& b) { return a[0] < b[0]; });
        // Order = largest achievable generator: sum of the g_active biggest cells.
        std::vector<int> sizes;
        sizes.reserve(cells.size());
        for (const Support& c : cells) sizes.push_back(c.size());
        std::sort(sizes.begin(), sizes.end(), std::greater<int>());
        int order = 0;
        for (int i = 0; i < g_active; ++i) order += sizes[static_cast<std::size_t>(i)];
        return SparsityModel(p, order, DisjointGroups{std::move(cells), g_active});
    }

    static SparsityModel explicit_family(int p, std::vector<Support> supports) {
        check_dim(p);
        if (supports.empty()) throw std::invalid_argument("empty generator family");
        for (const Support& s : supports) {
            if (s.empty()) throw std::invalid_argument("ExplicitFamily: empty generator set");
            if (s.max_index() >= p)
                throw std::invalid_argument("ExplicitFamily: index out of range");
        }
        std::vector<Support> canon = canonicalize_family(std::move(supports));
        int order = 0;
        for (const Support& s : canon) order = std::max(order, s.size());
        return SparsityModel(p, order, ExplicitFamily{std::move(canon)});
    }

    int ambient_dim() const { return p_; }
    int order() const { return order_; }
    const Kind& kind() const { return kind_; }

    /// True iff s lies inside some generator set. The empty support is always
    /// admissible (the model is downward closed).
    bool contains(const Support& s) const {
        if (s.max_index() >= p_) throw std::invalid_argument("support index out of range");
        if (const auto* pk = std::get_if<PlainK>(&kind_)) return s.size() <= pk->k;
        if (const auto* dg = std::get_if<DisjointGroups>(&kind_)) {
            int hit = 0;
            for (const Support& c : dg->cells) hit += c.intersects(s) ? 1 : 0;
            return hit <= dg->g_active;
        }
        const auto& ef = std::get<ExplicitFamily>(kind_);
        for (const Support& g : ef.generators)
            if (s.is_subset_of(g)) return true;
        return false;
    }

    /// Model generated by all j-wise unions of generator sets (supports of
    /// sums of j admissible vectors). Only j in {1,2,3} is supported.
    SparsityModel expand(int j) const {
        if (j < 1 || j > 3) throw std::invalid_argument("expand: j must be 1, 2, or 3");
        if (j == 1) return *this;
        if (const auto* pk = std::get_if<PlainK>(&kind_))
            return plain(p_, std::min(j * pk->k, p_));
        if (const auto* dg = std::get_if<DisjointGroups>(&kind_))
            return disjoint_groups(p_, dg->cells,
                                   std::min(j * dg->g_active, static_cast<int>(dg->cells.size())));
        const auto& gens = std::get<ExplicitFamily>(kind_).generators;
        const int m = static_cast<int>(gens.size());
        std::vector<Support> unions;
        for (int a = 0; a < m; ++a) {
            unions.push_back(gens[static_cast<std::size_t>(a)]);
            if (j < 2) continue;
            for (int b = a + 1; b < m; ++b) {
                Support ab = gens[static_cast<std::size_t>(a)].set_union(
                    gens[static_cast<std::size_t>(b)]);
                unions.push_back(ab);
                if (j < 3) continue;
                for (int c = b + 1; c < m; ++c)
                    unions.push_back(ab.set_union(gens[static_cast<std::size_t>(c)]));
            }
        }
        return explicit_family(p_, std::move(unions));
    }

    /// Exact number of maximal generator sets (saturating at UINT64_MAX).
    std::uint64_t generator_count() const {
        if (const auto* pk = std::get_if<PlainK>(&kind_))
            return binomial_saturating(p_, pk->k);
        if (const auto* dg = std::get_if<DisjointGroups>(&kind_))
            return binomial_saturating(static_cast<int>(dg->cells.size()), dg->g_active);
        return std::get<ExplicitFamily>(kind_).generators.size();
    }

    /// All maximal generator sets in lexicographic order; throws
    /// EnumerationBudgetExceeded when there are more than cap of them.
    std::vector<Support> enumerate_generators(std::uint64_t cap) const {
        const std::uint64_t count = generator_count();
        if (count > cap) throw EnumerationBudgetExceeded(count, cap);
        if (const auto* pk = std::get_if<PlainK>(&kind_)) return k_subsets(p_, pk->k);
        if (const auto* dg = std::get_if<DisjointGroups>(&kind_)) {
            std::vector<Support> out;
            for (const Support& combo :
                 k_subsets(static_cast<int>(dg->cells.size()), dg->g_active)) {
                Support u;
                for (int c : combo) u = u.set_union(dg->cells[static_cast<std::size_t>(c)]);
                out.push_back(std::move(u));
            }
            std::sort(out.begin(), out.end());
            return out;
        }
        return std::get<ExplicitFamily>(kind_).generators;
    }

    /// One maximal generator set drawn uniformly at random. Does not require
    /// the family to be enumerable.
    Support sample_generator(Rng& rng) const {
        if (const auto* pk = std::get_if<PlainK>(&kind_))
            return Support(sample_index_subset(rng, p_, pk->k));
        if (const auto* dg = std::get_if<DisjointGroups>(&kind_)) {
            const std::vector<int> combo =
                sample_index_subset(rng, static_cast<int>(dg->cells.size()), dg->g_active);
            Support u;
            for (int c : combo) u = u.set_union(dg->cells[static_cast<std::size_t>(c)]);
            return u;
        }
        const auto& gens = std::get<ExplicitFamily>(kind_).generators;
        return gens[rng.uniform_int(gens.size())];
    }

    std::string kind_name() const {
        if (std::holds_alternative<PlainK>(kind_)) return "plain_k";
        if (std::holds_alternative<DisjointGroups>(kind_)) return "disjoint_groups";
        return "explicit";
    }

private:
    SparsityModel(int p, int order, Kind kind) : p_(p), order_(order), kind_(std::move(kind)) {}

    static void check_dim(int p) {
        if (p < 1) throw std::invalid_argument("ambient dimension must be positive");
    }

    int p_;
    int order_;
    Kind kind_;
};

}  // namespace msgd
