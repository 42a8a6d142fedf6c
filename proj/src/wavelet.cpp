#include "spacetime/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spacetime {

WaveletBasis::WaveletBasis(int max_level) : max_level_(max_level) {
  if (max_level < 0 || max_level > 30) throw std::invalid_argument("WaveletBasis: level out of range");
  level_of_ = {0, 0};
  for (int j = 0; j < max_level; ++j) {
    const std::size_t nc = dim(j);
    const std::size_t nf = dim(j + 1);
    const std::size_t nw = std::size_t{1} << j;

    std::vector<Triplet> p;
    for (std::size_t k = 0; k < nc; ++k) {
      p.push_back({2 * k, k, 1.0});
      if (k > 0) p.push_back({2 * k - 1, k, 0.5});
      if (2 * k + 1 < nf) p.push_back({2 * k + 1, k, 0.5});
    }

    const double scale = std::pow(2.0, (j + 1) / 2.0);
    std::vector<Triplet> q;
    for (std::size_t k = 0; k < nw; ++k) {
      const std::size_t f = 2 * k + 1;
      const double left = (k == 0) ? -1.0 : -0.5;
      const double right = (k + 1 == nw) ? -1.0 : -0.5;
      q.push_back({f - 1, k, scale * left});
      q.push_back({f, k, scale});
      q.push_back({f + 1, k, scale * right});
    }

    std::vector<Triplet> m = p;
    for (const auto& t : q) m.push_back({t.row, t.col + nc, t.value});

    p_.push_back(SparseMatrix::from_triplets(nf, nc, std::move(p)));
    q_.push_back(SparseMatrix::from_triplets(nf, nw, std::move(q)));
    m_.push_back(SparseMatrix::from_triplets(nf, nf, std::move(m)));
    mt_.push_back(m_.back().transpose());
    level_of_.insert(level_of_.end(), nw, j + 1);
  }
}

namespace {

// out.column(i) = sum_k b(i, k) * source(k) for rows i in range.
template <class Source, class Dest>
void stage_rows(const SparseMatrix& b, ColumnRange range, std::size_t n_space, Source&& source, Dest&& dest) {
  for (std::size_t i = range.begin; i < range.end; ++i) {
    std::span<double> out = dest(i);
    std::fill(out.begin(), out.end(), 0.0);
    const auto cols = b.row_cols(i);
    const auto vals = b.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const std::span<const double> src = source(cols[p]);
      const double c = vals[p];
      for (std::size_t r = 0; r < n_space; ++r) out[r] += c * src[r];
    }
    flops::add(cols.size() * n_space);
  }
}

}  // namespace

WaveletTransform::WaveletTransform(std::shared_ptr<const WaveletBasis> basis) : basis_(std::move(basis)) {
  if (!basis_) throw std::invalid_argument("WaveletTransform: null basis");
}

void WaveletTransform::check(const SpaceTimeVector& in, const SpaceTimeVector& out) const {
  if (in.n_time() != n_time() || !in.same_shape(out)) throw std::invalid_argument("wavelet_apply: dimension mismatch");
  if (&in == &out) throw std::invalid_argument("wavelet_apply: input and output must differ");
}

void WaveletTransform::apply(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const {
  check(in, out);
  const int levels = basis_->max_level();
  const std::size_t nx = in.n_space();
  if (levels == 0) {
    std::copy(in.data().begin(), in.data().end(), out.data().begin());
    return;
  }
  // Stage j maps (coarse coefficients on V_j, level j+1 wavelet coefficients)
  // to single-scale coefficients on V_{j+1}. Coarse input comes from the
  // previous stage, wavelet coefficients straight from `in`.
  SpaceTimeVector buf[2];
  for (int j = 0; j < levels; ++j) {
    const std::size_t nc = WaveletBasis::dim(j);
    const std::size_t nf = WaveletBasis::dim(j + 1);
    const SpaceTimeVector& prev = (j == 0) ? in : buf[(j - 1) % 2];
    SpaceTimeVector* dst = &out;
    if (j + 1 < levels) {
      auto& b = buf[j % 2];
      if (b.n_space() != nx || b.n_time() < nf) b = SpaceTimeVector(nx, WaveletBasis::dim(levels - 1));
      dst = &b;
    }
    const SparseMatrix& m = basis_->two_scale(j);
    exec.for_each_range(nf, [&](std::size_t, ColumnRange r) {
      stage_rows(
          m, r, nx,
          [&](std::size_t k) { return k < nc ? prev.column(k) : in.column(k); },
          [&](std::size_t i) { return dst->column(i); });
    });
    ++stages_;
  }
}

void WaveletTransform::apply_transpose(const SpaceTimeVector& in, SpaceTimeVector& out, ColumnExecutor& exec) const {
  check(in, out);
  const int levels = basis_->max_level();
  const std::size_t nx = in.n_space();
  if (levels == 0) {
    std::copy(in.data().begin(), in.data().end(), out.data().begin());
    return;
  }
  // Stage j applies M_j^T to the single-scale prefix on V_{j+1}; the wavelet
  // part of the result is final, the coarse part feeds stage j-1.
  SpaceTimeVector buf[2];
  for (int j = levels - 1; j >= 0; --j) {
    const std::size_t nc = WaveletBasis::dim(j);
    const std::size_t nf = WaveletBasis::dim(j + 1);
    const SpaceTimeVector& prev = (j == levels - 1) ? in : buf[(j + 1) % 2];
    SpaceTimeVector* coarse_dst = &out;
    if (j > 0) {
      auto& b = buf[j % 2];
      if (b.n_space() != nx || b.n_time() < nc) b = SpaceTimeVector(nx, WaveletBasis::dim(levels - 1));
      coarse_dst = &b;
    }
    const SparseMatrix& mt = basis_->two_scale_transposed(j);
    exec.for_each_range(nf, [&](std::size_t, ColumnRange r) {
      stage_rows(
          mt, r, nx, [&](std::size_t k) { return prev.column(k); },
          [&](std::size_t i) { return i < nc ? coarse_dst->column(i) : out.column(i); });
    });
    ++stages_;
  }
}

SpaceTimeVector WaveletTransform::apply(const SpaceTimeVector& in) const {
  SpaceTimeVector out(in.n_space(), in.n_time());
  SerialExecutor serial;
  apply(in, out, serial);
  return out;
}

SpaceTimeVector WaveletTransform::apply_transpose(const SpaceTimeVector& in) const {
  SpaceTimeVector out(in.n_space(), in.n_time());
  SerialExecutor serial;
  apply_transpose(in, out, serial);
  return out;
}

}  // namespace spacetime
