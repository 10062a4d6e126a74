// Dense complex matrices sized for small antenna arrays; row-major storage.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace starnoma {

using cplx = std::complex<double>;

inline bool is_finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

class CMat {
 public:
  CMat() = default;

  CMat(int rows, int cols) : rows_(rows), cols_(cols), data_(check_dims(rows, cols)) {}

  CMat(int rows, int cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("CMat: nonpositive dimension");
    if (data_.size() != static_cast<size_t>(rows) * cols)
      throw std::invalid_argument("CMat: entry count does not match shape");
    for (cplx z : data_)
      if (!is_finite(z)) throw std::invalid_argument("CMat: non-finite entry");
  }

  static CMat identity(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMat column(std::vector<cplx> entries) {
    const int n = static_cast<int>(entries.size());
    return CMat(n, 1, std::move(entries));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cplx& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  cplx operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
  cplx& operator[](size_t i) { return data_[i]; }
  cplx operator[](size_t i) const { return data_[i]; }

  std::span<const cplx> entries() const { return data_; }
  std::span<cplx> entries() { return data_; }

  CMat& operator+=(const CMat& o) {
    require_same_shape(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  CMat& operator*=(cplx s) {
    for (cplx& z : data_) z *= s;
    return *this;
  }

  friend CMat operator+(CMat a, const CMat& b) { return a += b; }
  friend CMat operator*(CMat a, cplx s) { return a *= s; }
  friend CMat operator*(cplx s, CMat a) { return a *= s; }

  bool same_shape(const CMat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  static std::vector<cplx> check_dims(int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("CMat: nonpositive dimension");
    return std::vector<cplx>(static_cast<size_t>(rows) * cols, cplx{0.0, 0.0});
  }
  void require_same_shape(const CMat& o) const {
    if (!same_shape(o)) throw std::invalid_argument("CMat: shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<cplx> data_;
};

inline CMat matmul(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  CMat out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline CMat operator*(const CMat& a, const CMat& b) { return matmul(a, b); }

inline CMat hermitian(const CMat& a) {
  CMat out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

inline double frobenius_norm(const CMat& a) {
  double sum = 0.0;
  for (cplx z : a.entries()) sum += std::norm(z);
  return std::sqrt(sum);
}

inline CMat diag_from_vector(std::span<const cplx> v) {
  if (v.empty()) throw std::invalid_argument("diag_from_vector: empty vector");
  CMat out(static_cast<int>(v.size()), static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i), static_cast<int>(i)) = v[i];
  return out;
}

// a^H b for column vectors.
inline cplx inner(const CMat& a, const CMat& b) {
  if (a.cols() != 1 || b.cols() != 1 || a.rows() != b.rows())
    throw std::invalid_argument("inner: expects equal-length column vectors");
  cplx sum{0.0, 0.0};
  for (int i = 0; i < a.rows(); ++i) sum += std::conj(a(i, 0)) * b(i, 0);
  return sum;
}

}  // namespace starnoma
