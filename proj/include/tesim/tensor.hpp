/*
 * Copyright 2026 The tesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tesim {

class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Dims = std::vector<std::size_t>;

inline std::size_t element_count(const Dims& dims) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::string dims_to_string(const Dims& dims);

/// Row-major dense tensor. Rank-2 helpers cover every use in the encoder.
template <class T>
struct Tensor {
    Dims dims;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(Dims d, T fill = T{}) : dims(std::move(d)), data(element_count(dims), fill) {}
    Tensor(Dims d, std::vector<T> values) : dims(std::move(d)), data(std::move(values)) {
        if (data.size() != element_count(dims)) {
            throw ShapeError("tensor data length does not match dims " + dims_to_string(dims));
        }
    }

    std::size_t rank() const { return dims.size(); }
    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return dims.empty() ? 0 : dims[0]; }
    std::size_t cols() const { return dims.size() < 2 ? size() : dims[1]; }

    T& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
    const T& at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

    std::span<T> row(std::size_t i) { return {data.data() + i * cols(), cols()}; }
    std::span<const T> row(std::size_t i) const { return {data.data() + i * cols(), cols()}; }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

using RealTensor = Tensor<double>;

/// Strided 2-D window over a flat buffer.
template <class T>
class MatrixView {
public:
    MatrixView() = default;
    MatrixView(std::span<T> base, std::size_t rows, std::size_t cols, std::size_t stride)
        : base_(base), rows_(rows), cols_(cols), stride_(stride) {
        assert(cols <= stride);
        assert(rows == 0 || (rows - 1) * stride + cols <= base.size());
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) const { return base_[i * stride_ + j]; }

    /// Sub-window of columns [c0, c0 + n).
    MatrixView col_block(std::size_t c0, std::size_t n) const {
        return MatrixView(base_.subspan(c0), rows_, n, stride_);
    }

    operator MatrixView<const T>() const { return MatrixView<const T>(base_, rows_, cols_, stride_); }

private:
    std::span<T> base_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
};

template <class T>
MatrixView<T> view(Tensor<T>& t) {
    return MatrixView<T>(std::span<T>(t.data), t.rows(), t.cols(), t.cols());
}

template <class T>
MatrixView<const T> view(const Tensor<T>& t) {
    return MatrixView<const T>(std::span<const T>(t.data), t.rows(), t.cols(), t.cols());
}

}  // namespace tesim
