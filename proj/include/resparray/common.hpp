// SPDX-License-Identifier: Apache-2.0
//
// resparray: multi-person respiration measurement with MIMO array radar
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace resparray
{
    using cdouble = std::complex<double>;

    inline constexpr double pi = std::numbers::pi;

    // Bad input: malformed parameters, schema violations, inconsistent dimensions.
    class ValidationError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // File-level failures: unreadable files, bad magic, truncated payloads.
    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Dense row-major 3D array. Axis 0 is always slow time in this library.
    template <typename T>
    class Array3
    {
    public:
        Array3() = default;
        Array3(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
            : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

        std::size_t n0() const { return n0_; }
        std::size_t n1() const { return n1_; }
        std::size_t n2() const { return n2_; }
        std::size_t size() const { return data_.size(); }
        bool empty() const { return data_.empty(); }

        T &operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n1_ + j) * n2_ + k]; }
        const T &operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * n1_ + j) * n2_ + k]; }

        // Contiguous innermost row at (i, j).
        std::span<T> row(std::size_t i, std::size_t j) { return {data_.data() + (i * n1_ + j) * n2_, n2_}; }
        std::span<const T> row(std::size_t i, std::size_t j) const { return {data_.data() + (i * n1_ + j) * n2_, n2_}; }

        std::vector<T> &data() { return data_; }
        const std::vector<T> &data() const { return data_; }

    private:
        std::size_t n0_ = 0, n1_ = 0, n2_ = 0;
        std::vector<T> data_;
    };

    // Number of samples covering a duration at a given step, at least one.
    inline std::size_t samples_for(double duration_s, double step_s)
    {
        auto n = static_cast<long long>(duration_s / step_s + 0.5);
        return n < 1 ? 1 : static_cast<std::size_t>(n);
    }
}
