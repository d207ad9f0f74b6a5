#pragma once

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgd/types.hpp"

namespace msgd {

/// Index set supp(x): strictly increasing, duplicate-free coordinates.
class Support {
public:
    Support() = default;

    Support(std::initializer_list<int> indices)
        : Support(std::vector<int>(indices)) {}

    explicit Support(std::vector<int> indices) : idx_(std::move(indices)) {
        for (int i : idx_)
            if (i < 0) throw std::invalid_argument("Support: negative index");
        std::sort(idx_.begin(), idx_.end());
        idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    }

    /// {0, 1, ..., n-1}
    static Support range(int n) {
        std::vector<int> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
        Support s;
        s.idx_ = std::move(v);
        return s;
    }

    int size() const { return static_cast<int>(idx_.size()); }
    bool empty() const { return idx_.empty(); }
    int operator[](int i) const { return idx_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& indices() const { return idx_; }
    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

    int max_index() const { return idx_.empty() ? -1 : idx_.back(); }

    bool contains(int i) const {
        return std::binary_search(idx_.begin(), idx_.end(), i);
    }

    bool is_subset_of(const Support& other) const {
        return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
    }

    bool intersects(const Support& other) const {
        auto a = idx_.begin();
        auto b = other.idx_.begin();
        while (a != idx_.end() && b != other.idx_.end()) {
            if (*a == *b) return true;
            (*a < *b) ? ++a : ++b;
        }
        return false;
    }

    Support set_union(const Support& other) const {
        std::vector<int> out;
        out.reserve(idx_.size() + other.idx_.size());
        std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                       std::back_inserter(out));
        Support s;
        s.idx_ = std::move(out);
        return s;
    }

    friend bool operator==(const Support& a, const Support& b) { return a.idx_ == b.idx_; }
    friend bool operator!=(const Support& a, const Support& b) { return a.idx_ != b.idx_; }

    /// Lexicographic order on the sorted index lists.
    friend bool operator<(const Support& a, const Support& b) {
        return std::lexicographical_compare(a.idx_.begin(), a.idx_.end(),
                                            b.idx_.begin(), b.idx_.end());
    }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(idx_[i]);
        }
        return s + "}";
    }

private:
    std::vector<int> idx_;
};

/// Nonzero coordinates of v.
template <class Derived>
Support support_of(const Eigen::MatrixBase<Derived>& v) {
    std::vector<int> idx;
    for (Index i = 0; i < v.size(); ++i)
        if (v[i] != typename Derived::Scalar(0)) idx.push_back(static_cast<int>(i));
    return Support(std::move(idx));
}

/// v restricted to s, as a dense |s|-vector.
template <class Derived>
Vector<typename Derived::Scalar> restrict_to(const Eigen::MatrixBase<Derived>& v,
                                             const Support& s) {
    Vector<typename Derived::Scalar> out(s.size());
    for (int i = 0; i < s.size(); ++i) out[i] = v[s[i]];
    return out;
}

/// |s|-vector scattered back into an ambient p-vector (zeros elsewhere).
template <class Derived>
Vector<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& sub,
                                       const Support& s, Index p) {
    Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(p);
    for (int i = 0; i < s.size(); ++i) out[s[i]] = sub[i];
    return out;
}

/// v with coordinates outside s zeroed.
template <class Derived>
Vector<typename Derived::Scalar> mask_to(const Eigen::MatrixBase<Derived>& v,
                                         const Support& s) {
    Vector<typename Derived::Scalar> out = Vector<typename Derived::Scalar>::Zero(v.size());
    for (int i : s) out[i] = v[i];
    return out;
}

/// ||v|_s||^2, accumulated in index order.
template <class Derived>
typename Derived::Scalar squared_norm_on(const Eigen::MatrixBase<Derived>& v,
                                         const Support& s) {
    typename Derived::Scalar acc(0);
    for (int i : s) acc += v[i] * v[i];
    return acc;
}

/// Columns of x selected by s, keeping row (sample) order.
template <class Derived>
Matrix<typename Derived::Scalar> columns_at(const Eigen::MatrixBase<Derived>& x,
                                            const Support& s) {
    Matrix<typename Derived::Scalar> out(x.rows(), s.size());
    for (int j = 0; j < s.size(); ++j) out.col(j) = x.col(s[j]);
    return out;
}

}  // namespace msgd
