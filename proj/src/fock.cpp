#include "dalab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dalab {

namespace {

// Position of the exponent tuple a[0..d) within its degree, basis order.
// rank = Σ_{i<d-1} C(t_i + d - i - 2, d - i - 1) with t_i = Σ_{k>i} a_k.
std::size_t rankOf(const int* a, int d) {
    std::size_t rank = 0;
    int tail = 0;
    for (int k = 0; k < d; ++k) tail += a[k];
    for (int i = 0; i + 1 < d; ++i) {
        tail -= a[i];
        if (tail > 0) rank += binomial(tail + d - i - 2, d - i - 1);
    }
    return rank;
}

void enumerateInto(int d, int remaining, int pos, std::vector<int>& cur, std::vector<MultiIndex>& out) {
    if (pos == d - 1) {
        cur[static_cast<std::size_t>(pos)] = remaining;
        out.emplace_back(cur);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur[static_cast<std::size_t>(pos)] = v;
        enumerateInto(d, remaining - v, pos + 1, cur, out);
    }
}

// succ[r * d + j] = rank of (α_r + e_j) in degree e + 1.
std::vector<std::uint32_t> successorTable(int d, int e) {
    const auto indices = enumerateDegree(d, e);
    std::vector<std::uint32_t> table(indices.size() * static_cast<std::size_t>(d));
    std::vector<int> work(static_cast<std::size_t>(d));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        work = indices[r].exponents();
        for (int j = 0; j < d; ++j) {
            ++work[static_cast<std::size_t>(j)];
            table[r * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] =
                static_cast<std::uint32_t>(rankOf(work.data(), d));
            --work[static_cast<std::size_t>(j)];
        }
    }
    return table;
}

Complex monomialValue(const MultiIndex& alpha, const Point& z) {
    Complex v = 1.0;
    for (int k = 0; k < alpha.variables(); ++k)
        for (int e = 0; e < alpha[k]; ++e) v *= z(k);
    return v;
}

void requireVariable(int d, int i, const char* what) {
    if (i < 0 || i >= d)
        throw InvalidInput(std::string(what) + ": variable index " + std::to_string(i) + " out of range for d = " +
                           std::to_string(d));
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
    if (exponents_.empty()) throw InvalidInput("MultiIndex: at least one variable required");
    for (int e : exponents_) {
        if (e < 0) throw InvalidInput("MultiIndex: negative exponent");
        degree_ += e;
    }
}

MultiIndex MultiIndex::unit(int d, int i) {
    requireVariable(d, i, "MultiIndex::unit");
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = 1;
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    if (other.variables() != variables()) throw InvalidInput("MultiIndex: dimension mismatch");
    std::vector<int> e = exponents_;
    for (std::size_t k = 0; k < e.size(); ++k) e[k] += other.exponents_[k];
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
    if (other.variables() != variables()) throw InvalidInput("MultiIndex: dimension mismatch");
    std::vector<int> e = exponents_;
    for (std::size_t k = 0; k < e.size(); ++k) e[k] -= other.exponents_[k];
    return MultiIndex(std::move(e));
}

bool MultiIndex::divides(const MultiIndex& other) const {
    if (other.variables() != variables()) return false;
    for (std::size_t k = 0; k < exponents_.size(); ++k)
        if (exponents_[k] > other.exponents_[k]) return false;
    return true;
}

bool BasisOrder::operator()(const MultiIndex& a, const MultiIndex& b) const {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    return a.exponents() > b.exponents();
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (result > std::numeric_limits<std::uint64_t>::max())
            throw ScaleGuard("binomial(" + std::to_string(n) + ", " + std::to_string(k) + ") overflows 64 bits");
    }
    return static_cast<std::uint64_t>(result);
}

std::uint64_t degreeDimension(int d, int n) {
    if (d < 1) throw InvalidInput("degreeDimension: d must be positive");
    if (n < 0) return 0;
    return binomial(n + d - 1, d - 1);
}

std::vector<MultiIndex> enumerateDegree(int d, int n) {
    if (d < 1) throw InvalidInput("enumerateDegree: d must be positive");
    if (n < 0) throw InvalidInput("enumerateDegree: negative degree");
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(degreeDimension(d, n)));
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    enumerateInto(d, n, 0, cur, out);
    return out;
}

std::size_t basisRank(const MultiIndex& alpha) {
    return rankOf(alpha.exponents().data(), alpha.variables());
}

Rational monomialNormSquared(const MultiIndex& alpha) {
    using boost::multiprecision::cpp_int;
    auto factorial = [](int m) {
        cpp_int f = 1;
        for (int i = 2; i <= m; ++i) f *= i;
        return f;
    };
    cpp_int num = 1;
    for (int e : alpha.exponents()) num *= factorial(e);
    return Rational(num, factorial(alpha.degree()));
}

double monomialNormSquaredValue(const MultiIndex& alpha) {
    // α!/|α|! = Π_k 1 / binomial(s_k, α_k), s_k the running partial sums.
    double value = 1.0;
    int s = 0;
    for (int a : alpha.exponents()) {
        s += a;
        for (int i = 1; i <= a; ++i) value *= static_cast<double>(i) / static_cast<double>(s - a + i);
    }
    return value;
}

RealVector monomialNorms(int d, int n) {
    const auto indices = enumerateDegree(d, n);
    RealVector norms(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r)
        norms(static_cast<Eigen::Index>(r)) = std::sqrt(monomialNormSquaredValue(indices[r]));
    return norms;
}

// ---------------------------------------------------------------------------

HomogeneousPolynomial::HomogeneousPolynomial(int d, int degree) : d_(d), degree_(degree) {
    if (d < 1) throw InvalidInput("HomogeneousPolynomial: d must be positive");
    if (degree < 0) throw InvalidInput("HomogeneousPolynomial: negative degree");
}

HomogeneousPolynomial HomogeneousPolynomial::monomial(const MultiIndex& alpha, Complex coefficient) {
    HomogeneousPolynomial p(alpha.variables(), alpha.degree());
    p.add(alpha, coefficient);
    return p;
}

HomogeneousPolynomial HomogeneousPolynomial::fromCoordinates(int d, int degree, const Vector& coordinates) {
    const auto indices = enumerateDegree(d, degree);
    if (static_cast<std::size_t>(coordinates.size()) != indices.size())
        throw InvalidInput("fromCoordinates: coordinate vector has wrong length");
    HomogeneousPolynomial p(d, degree);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const Complex c = coordinates(static_cast<Eigen::Index>(r));
        if (c != Complex(0.0)) p.add(indices[r], c / std::sqrt(monomialNormSquaredValue(indices[r])));
    }
    return p;
}

Complex HomogeneousPolynomial::coefficient(const MultiIndex& alpha) const {
    const auto it = terms_.find(alpha);
    return it == terms_.end() ? Complex(0.0) : it->second;
}

void HomogeneousPolynomial::add(const MultiIndex& alpha, Complex c) {
    if (alpha.variables() != d_) throw InvalidInput("HomogeneousPolynomial: variable count mismatch");
    if (alpha.degree() != degree_)
        throw InvalidInput("HomogeneousPolynomial: term of degree " + std::to_string(alpha.degree()) +
                           " added to degree-" + std::to_string(degree_) + " polynomial");
    if (c == Complex(0.0)) return;
    auto [it, inserted] = terms_.emplace(alpha, c);
    if (!inserted) {
        it->second += c;
        if (it->second == Complex(0.0)) terms_.erase(it);
    }
}

Vector HomogeneousPolynomial::coordinates() const {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(degreeDimension(d_, degree_)));
    for (const auto& [alpha, c] : terms_)
        v(static_cast<Eigen::Index>(basisRank(alpha))) = c * std::sqrt(monomialNormSquaredValue(alpha));
    return v;
}

HomogeneousPolynomial HomogeneousPolynomial::operator*(const HomogeneousPolynomial& other) const {
    if (other.d_ != d_) throw InvalidInput("HomogeneousPolynomial: variable count mismatch");
    HomogeneousPolynomial out(d_, degree_ + other.degree_);
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : other.terms_) out.add(a + b, ca * cb);
    return out;
}

HomogeneousPolynomial HomogeneousPolynomial::operator+(const HomogeneousPolynomial& other) const {
    if (other.d_ != d_ || other.degree_ != degree_)
        throw InvalidInput("HomogeneousPolynomial: sum of mismatched polynomials");
    HomogeneousPolynomial out = *this;
    for (const auto& [a, c] : other.terms_) out.add(a, c);
    return out;
}

HomogeneousPolynomial HomogeneousPolynomial::scaled(Complex s) const {
    HomogeneousPolynomial out(d_, degree_);
    for (const auto& [a, c] : terms_) out.add(a, s * c);
    return out;
}

Complex innerProduct(const HomogeneousPolynomial& p, const HomogeneousPolynomial& q) {
    if (p.variables() != q.variables()) throw InvalidInput("innerProduct: mismatched ambient dimension");
    if (p.degree() != q.degree()) return 0.0;
    Complex sum = 0.0;
    for (const auto& [alpha, c] : p.terms()) {
        const Complex other = q.coefficient(alpha);
        if (other != Complex(0.0)) sum += c * std::conj(other) * monomialNormSquaredValue(alpha);
    }
    return sum;
}

// ---------------------------------------------------------------------------

SparseMatrix shiftSparse(int d, int i, int n) {
    requireVariable(d, i, "shiftBlock");
    const auto source = enumerateDegree(d, n);
    SparseMatrix s(static_cast<Eigen::Index>(degreeDimension(d, n + 1)), static_cast<Eigen::Index>(source.size()));
    std::vector<Eigen::Triplet<Complex>> entries;
    entries.reserve(source.size());
    std::vector<int> work(static_cast<std::size_t>(d));
    for (std::size_t c = 0; c < source.size(); ++c) {
        work = source[c].exponents();
        const int ai = work[static_cast<std::size_t>(i)];
        ++work[static_cast<std::size_t>(i)];
        const double weight = std::sqrt(static_cast<double>(ai + 1) / static_cast<double>(n + 1));
        entries.emplace_back(static_cast<Eigen::Index>(rankOf(work.data(), d)), static_cast<Eigen::Index>(c), weight);
    }
    s.setFromTriplets(entries.begin(), entries.end());
    return s;
}

OperatorBlock shiftBlock(int d, int i, int n) {
    return {n, n + 1, Matrix(shiftSparse(d, i, n))};
}

SparseMatrix fullCommutatorSparse(int d, int i, int j, int n) {
    requireVariable(d, i, "fullCommutatorBlock");
    requireVariable(d, j, "fullCommutatorBlock");
    SparseMatrix c = SparseMatrix(shiftSparse(d, i, n).adjoint()) * shiftSparse(d, j, n);
    if (n > 0) c -= shiftSparse(d, j, n - 1) * SparseMatrix(shiftSparse(d, i, n - 1).adjoint());
    c.prune(Complex(0.0));
    return c;
}

OperatorBlock fullCommutatorBlock(int d, int i, int j, int n) {
    return {n, n, Matrix(fullCommutatorSparse(d, i, j, n))};
}

HomogeneousPolynomial kernelVector(const Point& lambda, int n) {
    const int d = static_cast<int>(lambda.size());
    const Point conjLambda = lambda.conjugate();
    HomogeneousPolynomial p(d, n);
    for (const auto& alpha : enumerateDegree(d, n))
        p.add(alpha, monomialValue(alpha, conjLambda) / monomialNormSquaredValue(alpha));
    return p;
}

Vector kernelCoordinates(const Point& lambda, int n) {
    const int d = static_cast<int>(lambda.size());
    const Point conjLambda = lambda.conjugate();
    const auto indices = enumerateDegree(d, n);
    Vector v(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r)
        v(static_cast<Eigen::Index>(r)) =
            monomialValue(indices[r], conjLambda) / std::sqrt(monomialNormSquaredValue(indices[r]));
    return v;
}

Complex evaluate(const HomogeneousPolynomial& p, const Point& z) {
    if (z.size() != p.variables()) throw InvalidInput("evaluate: point dimension mismatch");
    Complex sum = 0.0;
    for (const auto& [alpha, c] : p.terms()) sum += c * monomialValue(alpha, z);
    return sum;
}

HomogeneousPolynomial composeLinear(const HomogeneousPolynomial& p, const Matrix& b) {
    if (b.rows() != p.variables())
        throw InvalidInput("composeLinear: matrix has " + std::to_string(b.rows()) + " rows, polynomial has " +
                           std::to_string(p.variables()) + " variables");
    if (b.cols() < 1) throw InvalidInput("composeLinear: target dimension must be positive");
    const int dOut = static_cast<int>(b.cols());
    const int n = p.degree();
    std::vector<std::vector<std::uint32_t>> succ;
    for (int e = 0; e < n; ++e) succ.push_back(successorTable(dOut, e));

    std::vector<Complex> total(static_cast<std::size_t>(degreeDimension(dOut, n)), 0.0);
    std::vector<Complex> cur, next;
    for (const auto& [beta, coeff] : p.terms()) {
        cur.assign(1, coeff);
        int e = 0;
        for (int k = 0; k < p.variables(); ++k) {
            for (int rep = 0; rep < beta[k]; ++rep, ++e) {
                next.assign(static_cast<std::size_t>(degreeDimension(dOut, e + 1)), 0.0);
                const auto& table = succ[static_cast<std::size_t>(e)];
                for (std::size_t r = 0; r < cur.size(); ++r) {
                    if (cur[r] == Complex(0.0)) continue;
                    for (int m = 0; m < dOut; ++m)
                        next[table[r * static_cast<std::size_t>(dOut) + static_cast<std::size_t>(m)]] +=
                            cur[r] * b(k, m);
                }
                cur.swap(next);
            }
        }
        for (std::size_t r = 0; r < cur.size(); ++r) total[r] += cur[r];
    }
    HomogeneousPolynomial out(dOut, n);
    const auto indices = enumerateDegree(dOut, n);
    for (std::size_t r = 0; r < indices.size(); ++r) out.add(indices[r], total[r]);
    return out;
}

// ---------------------------------------------------------------------------

LinearComposer::LinearComposer(Matrix b, int degree) : b_(std::move(b)), degree_(degree) {
    if (b_.rows() < 1 || b_.cols() < 1) throw InvalidInput("LinearComposer: empty matrix");
    if (degree_ < 0) throw InvalidInput("LinearComposer: negative degree");
    const int dOut = outputVariables();
    for (int e = 0; e < degree_; ++e) successors_.push_back(successorTable(dOut, e));
    for (int e = 0; e <= degree_; ++e) outputDims_.push_back(static_cast<std::size_t>(degreeDimension(dOut, e)));
    inputNorms_ = monomialNorms(inputVariables(), degree_);
    outputNorms_ = monomialNorms(dOut, degree_);
}

void LinearComposer::multiplyLinear(const std::vector<Complex>& in, int inDegree, int inputVar,
                                    std::vector<Complex>& out) const {
    const auto dOut = static_cast<std::size_t>(outputVariables());
    const auto& table = successors_[static_cast<std::size_t>(inDegree)];
    for (std::size_t r = 0; r < outputDims_[static_cast<std::size_t>(inDegree)]; ++r) {
        const Complex s = in[r];
        if (s == Complex(0.0)) continue;
        for (std::size_t m = 0; m < dOut; ++m)
            out[table[r * dOut + m]] += s * b_(inputVar, static_cast<Eigen::Index>(m));
    }
}

// buffers[t] receives Σ_γ f_{α+γ} ℓ^γ over γ of degree n - t supported on
// variables ≥ minVar, where α is the current prefix of degree t.
void LinearComposer::horner(int depth, int minVar, std::vector<int>& alpha, const std::vector<Complex>& raw,
                            std::vector<std::vector<Complex>>& buffers) const {
    auto& out = buffers[static_cast<std::size_t>(depth)];
    std::fill(out.begin(), out.end(), Complex(0.0));
    if (depth == degree_) {
        out[0] = raw[rankOf(alpha.data(), inputVariables())];
        return;
    }
    for (int j = minVar; j < inputVariables(); ++j) {
        ++alpha[static_cast<std::size_t>(j)];
        horner(depth + 1, j, alpha, raw, buffers);
        --alpha[static_cast<std::size_t>(j)];
        multiplyLinear(buffers[static_cast<std::size_t>(depth + 1)], degree_ - depth - 1, j, out);
    }
}

Vector LinearComposer::apply(const Vector& coordinates) const {
    if (coordinates.size() != inputNorms_.size())
        throw InvalidInput("LinearComposer: coordinate vector has wrong length");
    std::vector<Complex> raw(static_cast<std::size_t>(coordinates.size()));
    for (Eigen::Index r = 0; r < coordinates.size(); ++r) raw[static_cast<std::size_t>(r)] = coordinates(r) / inputNorms_(r);
    std::vector<std::vector<Complex>> buffers;
    for (int t = 0; t <= degree_; ++t) buffers.emplace_back(outputDims_[static_cast<std::size_t>(degree_ - t)]);
    std::vector<int> alpha(static_cast<std::size_t>(inputVariables()), 0);
    horner(0, 0, alpha, raw, buffers);
    Vector result(static_cast<Eigen::Index>(buffers[0].size()));
    for (Eigen::Index r = 0; r < result.size(); ++r) result(r) = buffers[0][static_cast<std::size_t>(r)] * outputNorms_(r);
    return result;
}

Matrix LinearComposer::apply(const Matrix& columns) const {
    Matrix out(static_cast<Eigen::Index>(outputDims_.back()), columns.cols());
    for (Eigen::Index c = 0; c < columns.cols(); ++c) out.col(c) = apply(Vector(columns.col(c)));
    return out;
}

Matrix LinearComposer::monomialImages() const {
    const int dIn = inputVariables();
    // images[c] holds the raw image of z^γ for γ of the current degree.
    std::vector<std::vector<Complex>> images{std::vector<Complex>{1.0}};
    for (int e = 0; e < degree_; ++e) {
        const auto next = enumerateDegree(dIn, e + 1);
        std::vector<std::vector<Complex>> grown(next.size());
        std::vector<int> work(static_cast<std::size_t>(dIn));
        for (std::size_t c = 0; c < next.size(); ++c) {
            work = next[c].exponents();
            int k = 0;
            while (work[static_cast<std::size_t>(k)] == 0) ++k;
            --work[static_cast<std::size_t>(k)];
            const auto& parent = images[rankOf(work.data(), dIn)];
            grown[c].assign(outputDims_[static_cast<std::size_t>(e + 1)], 0.0);
            multiplyLinear(parent, e, k, grown[c]);
        }
        images.swap(grown);
    }
    Matrix out(static_cast<Eigen::Index>(outputDims_.back()), static_cast<Eigen::Index>(images.size()));
    for (std::size_t c = 0; c < images.size(); ++c) {
        const double inv = 1.0 / inputNorms_(static_cast<Eigen::Index>(c));
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            out(r, static_cast<Eigen::Index>(c)) = images[c][static_cast<std::size_t>(r)] * outputNorms_(r) * inv;
    }
    return out;
}

}  // namespace dalab
