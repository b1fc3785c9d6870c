#include "fdacov/spectral.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#ifdef FDACOV_USE_LAPACK
extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork,
             int* info);
}
#endif

namespace fdacov {

const char* penalty_name(Penalty p) {
  switch (p) {
    case Penalty::TracePSD: return "trace_psd";
    case Penalty::TraceSym: return "trace_sym";
    case Penalty::HSPSD: return "hs_psd";
    case Penalty::HSSym: return "hs_sym";
  }
  return "unknown";
}

Penalty penalty_from_name(const std::string& name) {
  if (name == "trace_psd") return Penalty::TracePSD;
  if (name == "trace_sym") return Penalty::TraceSym;
  if (name == "hs_psd") return Penalty::HSPSD;
  if (name == "hs_sym") return Penalty::HSSym;
  throw InputError("unknown penalty name: " + name);
}

bool penalty_is_psd(Penalty p) {
  return p == Penalty::TracePSD || p == Penalty::HSPSD;
}

SymEig sym_eig(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("sym_eig: matrix must be square");
  const Eigen::Index n = a.rows();
  SymEig out;
  if (n == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
#ifdef FDACOV_USE_LAPACK
  // LAPACK dispatch overhead dominates below this size; Eigen is faster there.
  if (n <= 160) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
      throw NumericalError("sym_eig: eigendecomposition did not converge");
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::Index imax = 0;
      out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
      if (out.vectors(imax, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
    }
    return out;
  }
  Eigen::MatrixXd v = a;
  Eigen::VectorXd w(n);
  int in = static_cast<int>(n), lwork = -1, liwork = -1, info = 0;
  double wkopt = 0.0;
  int iwkopt = 0;
  dsyevd_("V", "L", &in, v.data(), &in, w.data(), &wkopt, &lwork, &iwkopt, &liwork, &info);
  lwork = static_cast<int>(wkopt);
  liwork = iwkopt;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  dsyevd_("V", "L", &in, v.data(), &in, w.data(), work.data(), &lwork, iwork.data(), &liwork,
          &info);
  if (info != 0)
    throw NumericalError("sym_eig: dsyevd failed with info = " + std::to_string(info));
  out.values = w.reverse();
  out.vectors = v.rowwise().reverse();
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw NumericalError("sym_eig: eigendecomposition did not converge");
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
#endif
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index imax = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
  }
  return out;
}

Eigen::VectorXd svec(const Eigen::MatrixXd& b) {
  if (b.rows() != b.cols()) throw InputError("svec: matrix must be square");
  const Eigen::Index q = b.rows();
  Eigen::VectorXd v(q * (q + 1) / 2);
  const double s2 = std::numbers::sqrt2;
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < q; ++j) {
    v[idx++] = b(j, j);
    for (Eigen::Index i = j + 1; i < q; ++i) v[idx++] = s2 * b(i, j);
  }
  return v;
}

Eigen::MatrixXd svec_inv(const Eigen::VectorXd& v) {
  const Eigen::Index len = v.size();
  const Eigen::Index q = static_cast<Eigen::Index>((std::sqrt(8.0 * double(len) + 1.0) - 1.0) / 2.0 + 0.5);
  if (q * (q + 1) / 2 != len)
    throw InputError("svec_inv: length is not a triangular number");
  Eigen::MatrixXd b(q, q);
  const double inv_s2 = 1.0 / std::numbers::sqrt2;
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < q; ++j) {
    b(j, j) = v[idx++];
    for (Eigen::Index i = j + 1; i < q; ++i) {
      const double x = v[idx++] * inv_s2;
      b(i, j) = x;
      b(j, i) = x;
    }
  }
  return b;
}

namespace {

void check_prox_args(const Eigen::MatrixXd& b, double nu) {
  if (b.rows() != b.cols()) throw InputError("prox: matrix must be square");
  if (nu < 0.0) throw InputError("prox: nu must be nonnegative");
}

Eigen::MatrixXd reassemble(const SymEig& es, const Eigen::VectorXd& d) {
  Eigen::MatrixXd m = es.vectors * d.asDiagonal() * es.vectors.transpose();
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  return sym;
}

}  // namespace

ProxResult prox_penalty(Penalty p, const Eigen::MatrixXd& b, double nu) {
  check_prox_args(b, nu);
  ProxResult out;
  if (p == Penalty::HSSym) {
    out.value = b / (1.0 + 2.0 * nu);
    out.penalty = out.value.squaredNorm();
    return out;
  }
  const SymEig es = sym_eig(b);
  Eigen::VectorXd d(es.values.size());
  switch (p) {
    case Penalty::TracePSD:
      d = (es.values.array() - nu).max(0.0);
      out.penalty = d.sum();
      break;
    case Penalty::TraceSym:
      d = es.values.array().sign() * (es.values.array().abs() - nu).max(0.0);
      out.penalty = d.cwiseAbs().sum();
      break;
    case Penalty::HSPSD:
      d = es.values.cwiseMax(0.0) / (1.0 + 2.0 * nu);
      out.penalty = d.squaredNorm();
      break;
    case Penalty::HSSym:
      break;  // handled above
  }
  out.value = reassemble(es, d);
  return out;
}

Eigen::MatrixXd prox_trace_psd(const Eigen::MatrixXd& b, double nu) {
  return prox_penalty(Penalty::TracePSD, b, nu).value;
}

Eigen::MatrixXd prox_trace_sym(const Eigen::MatrixXd& b, double nu) {
  return prox_penalty(Penalty::TraceSym, b, nu).value;
}

Eigen::MatrixXd prox_hs_psd(const Eigen::MatrixXd& b, double nu) {
  return prox_penalty(Penalty::HSPSD, b, nu).value;
}

Eigen::MatrixXd prox_hs_sym(const Eigen::MatrixXd& b, double nu) {
  return prox_penalty(Penalty::HSSym, b, nu).value;
}

double penalty_value(Penalty p, const Eigen::MatrixXd& b) {
  if (b.rows() != b.cols()) throw InputError("penalty_value: matrix must be square");
  if (p == Penalty::HSSym || p == Penalty::HSPSD) return b.squaredNorm();
  if (b.size() == 0) return 0.0;
  const SymEig es = sym_eig(b);
  return es.values.cwiseAbs().sum();
}

GramFactor factor_gram(const Eigen::MatrixXd& ktilde,
                       const std::vector<Eigen::Index>& curve_sizes, double rel_tol) {
  if (ktilde.rows() != ktilde.cols() || ktilde.rows() == 0)
    throw InputError("factor_gram: matrix must be square and non-empty");
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw InputError("factor_gram: rel_tol must lie in (0,1)");
  Eigen::Index total = 0;
  for (Eigen::Index s : curve_sizes) {
    if (s < 0) throw InputError("factor_gram: negative curve size");
    total += s;
  }
  if (total != ktilde.rows())
    throw InputError("factor_gram: curve sizes must sum to the matrix dimension");

  const SymEig es = sym_eig(ktilde);
  const double lmax = es.values[0];
  if (!(lmax > 0.0))
    throw NumericalError("factor_gram: matrix has no positive eigenvalue");
  if (es.values[es.values.size() - 1] < -1e-6 * lmax)
    throw NumericalError("factor_gram: input is not a Gram matrix (eigenvalue " +
                         std::to_string(es.values[es.values.size() - 1]) + ")");

  Eigen::Index kept = 0;
  while (kept < es.values.size() && es.values[kept] > rel_tol * lmax) ++kept;
  if (kept == 0) throw NumericalError("factor_gram: all eigenvalues below tolerance");

  GramFactor out;
  const Eigen::VectorXd sqrt_vals = es.values.head(kept).cwiseSqrt();
  out.M = es.vectors.leftCols(kept) * sqrt_vals.asDiagonal();
  out.M_pinv = sqrt_vals.cwiseInverse().asDiagonal() * es.vectors.leftCols(kept).transpose();
  out.rank_q = kept;
  out.curve_sizes = curve_sizes;
  out.curve_offsets.resize(curve_sizes.size());
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < curve_sizes.size(); ++i) {
    out.curve_offsets[i] = off;
    off += curve_sizes[i];
  }
  out.rel_tol = rel_tol;
  return out;
}

}  // namespace fdacov
