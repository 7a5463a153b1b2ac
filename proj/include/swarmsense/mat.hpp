#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace swarmsense {

// Dense row-major matrix. Used throughout for cell x timeslot grids
// (occupancy, aggregates, targets, sensing values).
template <class T>
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return d_.size(); }
    bool empty() const { return d_.empty(); }

    T& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return d_[r * cols_ + c];
    }
    const T& operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return d_[r * cols_ + c];
    }

    std::vector<T>& data() { return d_; }
    const std::vector<T>& data() const { return d_; }

    void fill(T v) { d_.assign(d_.size(), v); }

    template <class U>
    bool same_shape(const Mat<U>& o) const {
        return rows_ == o.rows() && cols_ == o.cols();
    }

    Mat& operator+=(const Mat& o) {
        assert(same_shape(o));
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        assert(same_shape(o));
        for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }

    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.d_ == b.d_;
    }

    T sum() const {
        T acc{};
        for (const T& v : d_) acc += v;
        return acc;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> d_;
};

using MatI = Mat<int>;
using MatD = Mat<double>;

// Root mean square error between two same-shape matrices.
template <class A, class B>
inline double rmse(const Mat<A>& x, const Mat<B>& y) {
    assert(x.rows() == y.rows() && x.cols() == y.cols());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x.data()[i]) - static_cast<double>(y.data()[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace swarmsense
