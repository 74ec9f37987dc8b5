// Dense complex linear algebra and quantum-state primitives: outcome strings,
// density operators, local (product) unitaries, partial trace/transpose,
// operator Schmidt spectra and Hermitian eigendecomposition.
#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace povmkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;

// Structural invariants hold at 1e-10, numerical algebra at 1e-8.
inline constexpr double kStructTol = 1e-10;
inline constexpr double kAlgebraTol = 1e-8;

inline bool is_power_of_two(Eigen::Index d) { return d > 0 && (d & (d - 1)) == 0; }

inline int qubit_count(Eigen::Index dim) {
    if (!is_power_of_two(dim)) throw std::invalid_argument("dimension is not a power of two");
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    return n;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix& m, double tol = kStructTol) {
    return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b); }

// --------------------------- 2x2 building blocks ---------------------------

inline Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

inline Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// --------------------------- outcome strings -------------------------------

// Bit string a_1...a_n with a_1 the most significant basis-index bit, so that
// |a_1> (x) ... (x) |a_n> sits at basis index sum_j a_j 2^(n-j).
class OutcomeString {
  public:
    explicit OutcomeString(std::vector<int> bits) : bits_(std::move(bits)) {
        if (bits_.empty()) throw std::invalid_argument("outcome string must have length >= 1");
        for (int b : bits_)
            if (b != 0 && b != 1) throw std::invalid_argument("outcome bits must be 0 or 1");
    }

    static OutcomeString from_string(const std::string& s) {
        std::vector<int> bits;
        bits.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw std::invalid_argument("outcome string must consist of 0/1");
            bits.push_back(c - '0');
        }
        return OutcomeString(std::move(bits));
    }

    static OutcomeString from_index(std::size_t index, int n) {
        std::vector<int> bits(n);
        for (int j = 0; j < n; ++j) bits[j] = static_cast<int>((index >> (n - 1 - j)) & 1);
        return OutcomeString(std::move(bits));
    }

    // All 2^n outcomes in basis-index order.
    static std::vector<OutcomeString> all(int n) {
        std::vector<OutcomeString> out;
        out.reserve(std::size_t{1} << n);
        for (std::size_t i = 0; i < (std::size_t{1} << n); ++i) out.push_back(from_index(i, n));
        return out;
    }

    int size() const { return static_cast<int>(bits_.size()); }
    int bit(int j) const { return bits_.at(j); }
    const std::vector<int>& bits() const { return bits_; }

    std::size_t basis_index() const {
        std::size_t idx = 0;
        for (int b : bits_) idx = (idx << 1) | static_cast<std::size_t>(b);
        return idx;
    }

    std::string str() const {
        std::string s;
        for (int b : bits_) s += static_cast<char>('0' + b);
        return s;
    }

    bool operator==(const OutcomeString& o) const { return bits_ == o.bits_; }

  private:
    std::vector<int> bits_;
};

inline Vector basis_state(int n, const OutcomeString& a) {
    Vector v = Vector::Zero(Eigen::Index{1} << n);
    v(static_cast<Eigen::Index>(a.basis_index())) = 1.0;
    return v;
}

inline Matrix basis_projector(int n, const OutcomeString& a) {
    Vector v = basis_state(n, a);
    return v * v.adjoint();
}

// --------------------------- eigendecomposition ----------------------------

struct EigResult {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // columns, orthonormal
};

inline EigResult eig_hermitian(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_hermitian: matrix not square");
    if (!is_hermitian(m, kAlgebraTol)) throw std::invalid_argument("eig_hermitian: matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(m));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: solver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(m));
    return solver.eigenvalues().minCoeff();
}

// --------------------------- density operators -----------------------------

class DensityOperator {
  public:
    explicit DensityOperator(Matrix m) : matrix_(std::move(m)) {
        if (matrix_.rows() != matrix_.cols() || !is_power_of_two(matrix_.rows()))
            throw std::invalid_argument("density operator: dimension must be 2^n");
        if (!is_hermitian(matrix_, kStructTol))
            throw std::invalid_argument("density operator: not Hermitian");
        if (std::abs(matrix_.trace().real() - 1.0) > kStructTol || std::abs(matrix_.trace().imag()) > kStructTol)
            throw std::invalid_argument("density operator: trace != 1");
        if (min_eigenvalue(matrix_) < -kStructTol)
            throw std::invalid_argument("density operator: not positive semidefinite");
    }

    static DensityOperator pure(const Vector& psi) {
        Vector v = psi / psi.norm();
        return DensityOperator(v * v.adjoint());
    }

    static DensityOperator maximally_mixed(int n) {
        Eigen::Index d = Eigen::Index{1} << n;
        return DensityOperator(Matrix::Identity(d, d) / static_cast<double>(d));
    }

    const Matrix& matrix() const { return matrix_; }
    Eigen::Index dim() const { return matrix_.rows(); }
    int qubits() const { return qubit_count(matrix_.rows()); }

  private:
    Matrix matrix_;
};

// --------------------------- local unitaries -------------------------------

// V = V_1 (x) ... (x) V_n, one 2x2 factor per qubit in qubit order.
class LocalUnitary {
  public:
    explicit LocalUnitary(std::vector<Matrix2> factors, double tol = kStructTol)
        : factors_(std::move(factors)) {
        if (factors_.empty()) throw std::invalid_argument("local unitary: needs >= 1 factor");
        for (const auto& u : factors_) {
            if ((u.adjoint() * u - Matrix2::Identity()).cwiseAbs().maxCoeff() > tol)
                throw std::invalid_argument("local unitary: factor is not unitary");
        }
    }

    static LocalUnitary identity(int n) {
        return LocalUnitary(std::vector<Matrix2>(n, Matrix2::Identity()));
    }

    int qubits() const { return static_cast<int>(factors_.size()); }
    const std::vector<Matrix2>& factors() const { return factors_; }
    const Matrix2& factor(int j) const { return factors_.at(j); }

    Matrix full() const {
        Matrix u = Matrix::Identity(1, 1);
        for (const auto& f : factors_) u = kron(u, Matrix(f));
        return u;
    }

    // V|a>, built factor-wise (cheaper than full() for hot loops).
    Vector apply_to_basis(const OutcomeString& a) const {
        Vector v = Vector::Ones(1);
        for (int j = 0; j < qubits(); ++j) {
            Vector col = factors_[static_cast<std::size_t>(j)].col(a.bit(j));
            Vector next(v.size() * 2);
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                next(2 * i) = v(i) * col(0);
                next(2 * i + 1) = v(i) * col(1);
            }
            v = next;
        }
        return v;
    }

  private:
    std::vector<Matrix2> factors_;
};

// Closest unitary in Frobenius norm (polar factor); used when re-unitarizing
// matrices printed at limited precision.
inline Matrix2 closest_unitary(const Matrix2& m) {
    Eigen::JacobiSVD<Matrix2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

// --------------------------- core operations -------------------------------

inline double expectation(const DensityOperator& rho, const Matrix& effect) {
    if (effect.rows() != rho.dim() || effect.cols() != rho.dim())
        throw std::invalid_argument("expectation: dimension mismatch");
    if (!is_hermitian(effect, kAlgebraTol))
        throw std::invalid_argument("expectation: effect is not Hermitian");
    Complex tr = (rho.matrix() * effect).trace();
    if (std::abs(tr.imag()) > kStructTol)
        throw std::runtime_error("expectation: non-negligible imaginary trace");
    return tr.real();
}

namespace detail {

inline void check_qubit_set(const std::vector<int>& qs, int n, const char* what) {
    if (qs.empty()) throw std::invalid_argument(std::string(what) + ": empty qubit set");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int q : qs) {
        if (q < 0 || q >= n) throw std::invalid_argument(std::string(what) + ": qubit index out of range");
        if (seen[static_cast<std::size_t>(q)]) throw std::invalid_argument(std::string(what) + ": repeated qubit index");
        seen[static_cast<std::size_t>(q)] = true;
    }
}

inline int bit_of(std::size_t index, int q, int n) { return static_cast<int>((index >> (n - 1 - q)) & 1); }

}  // namespace detail

// Trace out every qubit not in `keep`; kept qubits preserve their relative order.
inline Matrix partial_trace(const Matrix& m, std::vector<int> keep) {
    int n = qubit_count(m.rows());
    detail::check_qubit_set(keep, n, "partial_trace");
    std::sort(keep.begin(), keep.end());
    if (static_cast<int>(keep.size()) == n) return m;

    std::vector<int> rest;
    for (int q = 0; q < n; ++q)
        if (!std::binary_search(keep.begin(), keep.end(), q)) rest.push_back(q);

    const std::size_t d = std::size_t{1} << n;
    const std::size_t dk = std::size_t{1} << keep.size();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < d; ++r) {
        std::size_t kr = 0;
        for (int q : keep) kr = (kr << 1) | static_cast<std::size_t>(detail::bit_of(r, q, n));
        for (std::size_t c = 0; c < d; ++c) {
            bool diag = true;
            for (int q : rest)
                if (detail::bit_of(r, q, n) != detail::bit_of(c, q, n)) { diag = false; break; }
            if (!diag) continue;
            std::size_t kc = 0;
            for (int q : keep) kc = (kc << 1) | static_cast<std::size_t>(detail::bit_of(c, q, n));
            out(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(kc)) +=
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    return out;
}

// Transpose the indices of the listed qubits only.
inline Matrix partial_transpose(const Matrix& m, const std::vector<int>& transposed) {
    int n = qubit_count(m.rows());
    detail::check_qubit_set(transposed, n, "partial_transpose");
    const std::size_t d = std::size_t{1} << n;
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t rr = r, cc = c;
            for (int q : transposed) {
                std::size_t mask = std::size_t{1} << (n - 1 - q);
                std::size_t rb = r & mask, cb = c & mask;
                rr = (rr & ~mask) | cb;
                cc = (cc & ~mask) | rb;
            }
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m(static_cast<Eigen::Index>(rr), static_cast<Eigen::Index>(cc));
        }
    }
    return out;
}

// Singular values of the realignment across the bipartition (A : complement),
// descending. The number of values above rel_tol * largest is the operator
// Schmidt rank; rank 1 means M = A (x) B.
inline std::vector<double> operator_schmidt_spectrum(const Matrix& m, std::vector<int> part_a) {
    int n = qubit_count(m.rows());
    detail::check_qubit_set(part_a, n, "operator_schmidt_spectrum");
    if (static_cast<int>(part_a.size()) == n)
        throw std::invalid_argument("operator_schmidt_spectrum: bipartition must be proper");
    std::sort(part_a.begin(), part_a.end());
    std::vector<int> part_b;
    for (int q = 0; q < n; ++q)
        if (!std::binary_search(part_a.begin(), part_a.end(), q)) part_b.push_back(q);

    const std::size_t da = std::size_t{1} << part_a.size();
    const std::size_t db = std::size_t{1} << part_b.size();
    const std::size_t d = std::size_t{1} << n;
    Matrix realigned = Matrix::Zero(static_cast<Eigen::Index>(da * da), static_cast<Eigen::Index>(db * db));
    for (std::size_t r = 0; r < d; ++r) {
        std::size_t ia = 0, ib = 0;
        for (int q : part_a) ia = (ia << 1) | static_cast<std::size_t>(detail::bit_of(r, q, n));
        for (int q : part_b) ib = (ib << 1) | static_cast<std::size_t>(detail::bit_of(r, q, n));
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t ja = 0, jb = 0;
            for (int q : part_a) ja = (ja << 1) | static_cast<std::size_t>(detail::bit_of(c, q, n));
            for (int q : part_b) jb = (jb << 1) | static_cast<std::size_t>(detail::bit_of(c, q, n));
            realigned(static_cast<Eigen::Index>(ia * da + ja), static_cast<Eigen::Index>(ib * db + jb)) =
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
    Eigen::JacobiSVD<Matrix> svd(realigned);
    std::vector<double> sv(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
    return sv;
}

inline double trace_distance(const Matrix& a, const Matrix& b) {
    EigResult e = eig_hermitian(hermitize(a - b));
    return 0.5 * e.values.cwiseAbs().sum();
}

inline double purity(const DensityOperator& rho) {
    return (rho.matrix() * rho.matrix()).trace().real();
}

}  // namespace povmkit
