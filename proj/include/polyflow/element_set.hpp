#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace polyflow {

// Dense bitset over a ground set of contiguous integer ids 0..n-1.
class ElementSet {
public:
    ElementSet() = default;
    explicit ElementSet(int universe) : n_(universe), words_((universe + 63) / 64, 0) {}

    static ElementSet full(int universe) {
        ElementSet s(universe);
        for (int e = 0; e < universe; ++e) s.add(e);
        return s;
    }
    static ElementSet of(int universe, std::initializer_list<int> elems) {
        ElementSet s(universe);
        for (int e : elems) s.add(e);
        return s;
    }
    template <class Container>
    static ElementSet from(int universe, const Container& elems) {
        ElementSet s(universe);
        for (int e : elems) s.add(e);
        return s;
    }

    int universe_size() const { return n_; }

    bool contains(int e) const {
        return (words_[static_cast<size_t>(e) >> 6] >> (e & 63)) & 1ULL;
    }
    void add(int e) { words_[static_cast<size_t>(e) >> 6] |= 1ULL << (e & 63); }
    void remove(int e) { words_[static_cast<size_t>(e) >> 6] &= ~(1ULL << (e & 63)); }

    bool empty() const {
        for (uint64_t w : words_)
            if (w) return false;
        return true;
    }
    int count() const {
        int c = 0;
        for (uint64_t w : words_) c += __builtin_popcountll(w);
        return c;
    }

    bool is_superset_of(const ElementSet& other) const {
        for (size_t i = 0; i < words_.size(); ++i)
            if (other.words_[i] & ~words_[i]) return false;
        return true;
    }
    bool intersects(const ElementSet& other) const {
        for (size_t i = 0; i < words_.size(); ++i)
            if (other.words_[i] & words_[i]) return true;
        return false;
    }

    ElementSet& operator|=(const ElementSet& o) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    ElementSet& operator&=(const ElementSet& o) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    ElementSet& operator-=(const ElementSet& o) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }

    friend ElementSet operator|(ElementSet a, const ElementSet& b) { return a |= b; }
    friend ElementSet operator&(ElementSet a, const ElementSet& b) { return a &= b; }
    friend ElementSet operator-(ElementSet a, const ElementSet& b) { return a -= b; }

    bool operator==(const ElementSet& o) const { return n_ == o.n_ && words_ == o.words_; }
    bool operator!=(const ElementSet& o) const { return !(*this == o); }

    template <class F>
    void for_each(F&& fn) const {
        for (size_t i = 0; i < words_.size(); ++i) {
            uint64_t w = words_[i];
            while (w) {
                int b = __builtin_ctzll(w);
                fn(static_cast<int>(i * 64 + b));
                w &= w - 1;
            }
        }
    }

    std::vector<int> to_vector() const {
        std::vector<int> v;
        v.reserve(static_cast<size_t>(count()));
        for_each([&](int e) { v.push_back(e); });
        return v;
    }

    uint64_t hash() const {
        uint64_t h = 1469598103934665603ULL;
        for (uint64_t w : words_) {
            h ^= w;
            h *= 1099511628211ULL;
        }
        return h;
    }

    // Low word as a mask; only meaningful when universe_size() <= 64.
    uint64_t low_mask() const { return words_.empty() ? 0 : words_[0]; }

private:
    int n_ = 0;
    std::vector<uint64_t> words_;
};

struct ElementSetHash {
    size_t operator()(const ElementSet& s) const { return static_cast<size_t>(s.hash()); }
};

}  // namespace polyflow
