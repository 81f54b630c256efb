#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "adanorm/errors.hpp"

namespace adanorm {

using Shape = std::vector<std::int64_t>;

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ", ";
        os << s[i];
    }
    os << ']';
    return os.str();
}

inline std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

// Dense tensor: a flat scalar buffer plus an explicit shape. Rank is
// arbitrary but the toolkit only ever uses rank 1 and rank 2; rank-2 data is
// row-major. All arithmetic delegates to Eigen array expressions.
template <typename ScalarT>
class TensorT {
public:
    using Scalar = ScalarT;
    using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
    using MatrixMap =
        Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstMatrixMap =
        Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    TensorT() = default;

    explicit TensorT(Shape shape) : shape_(std::move(shape)) {
        check_shape(shape_);
        data_ = Storage::Zero(shape_numel(shape_));
    }

    TensorT(Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_shape(shape_);
        if (shape_numel(shape_) != data_.size())
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
    }

    TensorT(std::initializer_list<Scalar> values)
        : shape_{static_cast<std::int64_t>(values.size())} {
        check_shape(shape_);
        data_.resize(static_cast<Eigen::Index>(values.size()));
        Eigen::Index i = 0;
        for (Scalar v : values) data_[i++] = v;
    }

    // A braced list of integers is ambiguous between a shape and values;
    // spell Tensor(Shape{...}) or use floating literals.
    TensorT(std::initializer_list<std::int64_t>) = delete;

    static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }

    static TensorT full(Shape shape, Scalar value) {
        TensorT t(std::move(shape));
        t.data_.setConstant(value);
        return t;
    }

    static TensorT from_vector(Shape shape, const std::vector<Scalar>& values) {
        Storage s(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i)
            s[static_cast<Eigen::Index>(i)] = values[i];
        return TensorT(std::move(shape), std::move(s));
    }

    const Shape& shape() const { return shape_; }
    std::int64_t size() const { return data_.size(); }
    std::size_t rank() const { return shape_.size(); }

    Scalar operator[](std::int64_t i) const { return data_[i]; }
    Scalar& operator[](std::int64_t i) { return data_[i]; }

    // Rank-2 element access, row-major.
    Scalar at(std::int64_t r, std::int64_t c) const {
        return data_[r * shape_.at(1) + c];
    }
    Scalar& at(std::int64_t r, std::int64_t c) {
        return data_[r * shape_.at(1) + c];
    }

    std::int64_t rows() const {
        require_rank2("rows()");
        return shape_[0];
    }
    std::int64_t cols() const {
        require_rank2("cols()");
        return shape_[1];
    }

    Storage& array() { return data_; }
    const Storage& array() const { return data_; }

    MatrixMap matrix() {
        require_rank2("matrix()");
        return MatrixMap(data_.data(), shape_[0], shape_[1]);
    }
    ConstMatrixMap matrix() const {
        require_rank2("matrix()");
        return ConstMatrixMap(data_.data(), shape_[0], shape_[1]);
    }

    bool is_finite() const { return data_.isFinite().all(); }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

private:
    static void check_shape(const Shape& s) {
        for (auto d : s)
            if (d <= 0)
                throw ShapeError("tensor shape " + shape_str(s) +
                                 " has a non-positive extent");
    }
    void require_rank2(const char* who) const {
        if (shape_.size() != 2)
            throw ShapeError(std::string(who) + " requires a rank-2 tensor, got shape " +
                             shape_str(shape_));
    }

    Shape shape_;
    Storage data_;
};

using Tensor = TensorT<double>;

namespace detail {
template <typename S>
void require_same_shape(const TensorT<S>& a, const TensorT<S>& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}
}  // namespace detail

// Elementwise binary ops. No broadcasting: shapes must match exactly.
template <typename S>
TensorT<S> operator+(const TensorT<S>& a, const TensorT<S>& b) {
    detail::require_same_shape(a, b, "add");
    return TensorT<S>(a.shape(), a.array() + b.array());
}

template <typename S>
TensorT<S> operator-(const TensorT<S>& a, const TensorT<S>& b) {
    detail::require_same_shape(a, b, "sub");
    return TensorT<S>(a.shape(), a.array() - b.array());
}

template <typename S>
TensorT<S> operator*(const TensorT<S>& a, const TensorT<S>& b) {
    detail::require_same_shape(a, b, "mul");
    return TensorT<S>(a.shape(), a.array() * b.array());
}

template <typename S>
TensorT<S> operator/(const TensorT<S>& a, const TensorT<S>& b) {
    detail::require_same_shape(a, b, "div");
    return TensorT<S>(a.shape(), a.array() / b.array());
}

template <typename S>
TensorT<S> operator*(S k, const TensorT<S>& a) {
    return TensorT<S>(a.shape(), k * a.array());
}
template <typename S>
TensorT<S> operator*(const TensorT<S>& a, S k) {
    return k * a;
}

template <typename S>
TensorT<S> operator+(const TensorT<S>& a, S k) {
    return TensorT<S>(a.shape(), a.array() + k);
}
template <typename S>
TensorT<S> operator+(S k, const TensorT<S>& a) {
    return a + k;
}

template <typename S>
TensorT<S> operator-(const TensorT<S>& a) {
    return TensorT<S>(a.shape(), -a.array());
}

template <typename S>
TensorT<S>& operator+=(TensorT<S>& a, const TensorT<S>& b) {
    detail::require_same_shape(a, b, "add");
    a.array() += b.array();
    return a;
}

template <typename S>
TensorT<S> square(const TensorT<S>& a) {
    return TensorT<S>(a.shape(), a.array().square());
}

template <typename S>
TensorT<S> sqrt(const TensorT<S>& a) {
    return TensorT<S>(a.shape(), a.array().sqrt());
}

template <typename S>
TensorT<S> abs(const TensorT<S>& a) {
    return TensorT<S>(a.shape(), a.array().abs());
}

template <typename S>
TensorT<S> sigmoid(const TensorT<S>& a) {
    return TensorT<S>(a.shape(), S(1) / (S(1) + (-a.array()).exp()));
}

template <typename S>
S sum(const TensorT<S>& a) {
    return a.array().sum();
}

template <typename S>
S l2_norm(const TensorT<S>& a) {
    return std::sqrt(a.array().square().sum());
}

// Row-major matrix product for rank-2 tensors: [m,k] x [k,n] -> [m,n].
template <typename S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul requires rank-2 tensors, got " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
    TensorT<S> out(Shape{a.rows(), b.cols()});
    out.matrix().noalias() = a.matrix() * b.matrix();
    return out;
}

}  // namespace adanorm
