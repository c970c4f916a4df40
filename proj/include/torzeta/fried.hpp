#pragma once

// Fried zeta functions for suspension flows of hyperbolic elements of
// SL(2,Z): exact orbit counting via the trace recursion, Mobius inversion to
// primitive counts, truncated Euler products with rigorous tail bounds, the
// rational closed form, the orbit-sum log series, and the Poincare duality
// check.
//
// Model: the suspension flow of A on T^2 x [0,1] with unit roof, a rank-1
// unitary twist of holonomy e^{i theta} per unit time, n_u = n_s = 1, n = 3.
// Period-k orbits correspond to fixed points of A^k; the weight of a
// primitive period-k orbit is s_k e^{ik theta} with s_k the sign of the
// stable eigenvalue of A^k (the o(T_sY) holonomy).

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace torzeta {

using BigInt = boost::multiprecision::cpp_int;
using Cplx = std::complex<double>;

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Suspension of a hyperbolic A in SL(2,Z) with roof 1 and twist angle theta.
struct SuspensionModel {
    long long a11 = 2, a12 = 1, a21 = 1, a22 = 1;  // cat map by default
    double theta = 0.0;

    long long trace() const { return a11 + a22; }
    long long det() const { return a11 * a22 - a12 * a21; }

    void validate() const {
        if (det() != 1) throw ModelError("SuspensionModel: det A must be 1");
        if (std::abs(trace()) <= 2)
            throw ModelError("SuspensionModel: |tr A| must exceed 2 (hyperbolicity)");
    }

    /// The eigenvalue of A with |lambda| > 1 (signed real).
    double lambda() const {
        double t = static_cast<double>(trace());
        double s = std::sqrt(t * t - 4.0);
        return (t > 0) ? (t + s) / 2.0 : (t - s) / 2.0;
    }

    /// Suspension of A^{-1}: the time-reversed flow (same orbits).
    SuspensionModel reversed() const { return {a22, -a12, -a21, a11, -theta}; }
};

// ---------------------------------------------------------------------------
// Orbit counting
// ---------------------------------------------------------------------------

/// N_k = |det(A^k - I)| = |2 - tr A^k| by the trace recursion
/// tr A^{k+1} = (tr A) tr A^k - tr A^{k-1}, in exact integer arithmetic.
inline std::vector<BigInt> fixed_counts(const SuspensionModel& A, int K) {
    A.validate();
    std::vector<BigInt> N(static_cast<size_t>(K) + 1, 0);
    BigInt tr = A.trace();
    BigInt prev = 2, cur = tr;  // tr A^0, tr A^1
    for (int k = 1; k <= K; ++k) {
        BigInt nk = 2 - cur;
        if (nk < 0) nk = -nk;
        N[static_cast<size_t>(k)] = nk;
        BigInt next = tr * cur - prev;
        prev = cur;
        cur = next;
    }
    return N;
}

/// Mobius function on 1..K.
inline std::vector<int> moebius_table(int K) {
    std::vector<int> mu(static_cast<size_t>(K) + 1, 1);
    std::vector<int> smallest(static_cast<size_t>(K) + 1, 0);
    for (int i = 2; i <= K; ++i) {
        if (smallest[static_cast<size_t>(i)] == 0)
            for (int j = i; j <= K; j += i)
                if (smallest[static_cast<size_t>(j)] == 0) smallest[static_cast<size_t>(j)] = i;
    }
    for (int i = 2; i <= K; ++i) {
        int x = i, last = 0;
        int m = 1;
        while (x > 1) {
            int sp = smallest[static_cast<size_t>(x)];
            if (sp == last) { m = 0; break; }
            m = -m;
            last = sp;
            x /= sp;
        }
        mu[static_cast<size_t>(i)] = m;
    }
    return mu;
}

/// P_k = (1/k) sum_{d | k} mu(k/d) N_d, exact; re-verifies
/// sum_{d | k} d P_d = N_k.
inline std::vector<BigInt> primitive_counts(const std::vector<BigInt>& N) {
    int K = static_cast<int>(N.size()) - 1;
    auto mu = moebius_table(K);
    std::vector<BigInt> P(N.size(), 0);
    for (int k = 1; k <= K; ++k) {
        BigInt s = 0;
        for (int d = 1; d <= k; ++d)
            if (k % d == 0) s += BigInt(mu[static_cast<size_t>(k / d)]) * N[static_cast<size_t>(d)];
        if (s % k != 0)
            throw ModelError("primitive_counts: Mobius sum not divisible at k = " +
                             std::to_string(k));
        P[static_cast<size_t>(k)] = s / k;
    }
    for (int k = 1; k <= K; ++k) {
        BigInt s = 0;
        for (int d = 1; d <= k; ++d)
            if (k % d == 0) s += BigInt(d) * P[static_cast<size_t>(d)];
        if (s != N[static_cast<size_t>(k)])
            throw ModelError("primitive_counts: sum_{d|k} d P_d != N_k at k = " +
                             std::to_string(k));
    }
    return P;
}

/// Sign of the stable eigenvalue of A^k (the o(T_sY) holonomy of a period-k
/// orbit): +1 for tr A > 2, (-1)^k for tr A < -2.
inline int stable_sign(const SuspensionModel& A, int k) {
    A.validate();
    if (A.trace() > 2) return 1;
    return (k % 2) ? -1 : 1;
}

/// log(1 - w) without cancellation for small |w| (the Euler factors carry
/// huge P_k against log factors of size q^k, so absolute accuracy of the log
/// matters).
inline Cplx log_one_minus(Cplx w) {
    if (std::abs(w) > 1e-4) return std::log(Cplx(1.0) - w);
    Cplx s = 0.0, wp = w;
    for (int j = 1; j <= 5; ++j) {
        s -= wp / static_cast<double>(j);
        wp *= w;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Zeta evaluations
// ---------------------------------------------------------------------------

struct ZetaEvaluation {
    Cplx sigma;
    int K = 0;
    Cplx value = 1.0;
    double tail_bound = std::numeric_limits<double>::infinity();
    bool tail_bounded = false;
    Cplx closed_form = 0.0;
    bool has_closed_form = false;
};

/// Truncated Euler product prod_{k<=K} (1 - s_k e^{ik theta} e^{-k sigma})^{P_k}
/// with the (-1)^{n_s+1} = +1 exponent of the n_s = 1 model.  The tail bound
/// uses P_k <= N_k / k <= (|lambda|^k + 3)/k and geometric sums; it is finite
/// for Re sigma > log |lambda|.
inline ZetaEvaluation fried_zeta_truncated(const SuspensionModel& A, Cplx sigma, int K) {
    A.validate();
    auto N = fixed_counts(A, K);
    auto P = primitive_counts(N);
    Cplx log_val = 0.0;
    for (int k = 1; k <= K; ++k) {
        if (P[static_cast<size_t>(k)] == 0) continue;
        Cplx w = static_cast<double>(stable_sign(A, k)) *
                 std::exp(Cplx(0.0, k * A.theta)) * std::exp(-static_cast<double>(k) * sigma);
        double pk = static_cast<double>(P[static_cast<size_t>(k)]);
        log_val += pk * log_one_minus(w);
    }
    ZetaEvaluation ev;
    ev.sigma = sigma;
    ev.K = K;
    ev.value = std::exp(log_val);

    double lam = std::abs(A.lambda());
    double qq = std::exp(-sigma.real());
    double lq = lam * qq;
    if (lq < 1.0 && qq < 1.0) {
        // sum_{k>K} x^k / k <= x^{K+1} / ((K+1)(1-x))
        auto tail_geo = [K](double x) {
            return std::pow(x, K + 1) / ((K + 1) * (1.0 - x));
        };
        double tail_log = (tail_geo(lq) + 3.0 * tail_geo(qq)) / (1.0 - std::max(lq, qq));
        ev.tail_bound = std::abs(ev.value) * std::expm1(tail_log);
        ev.tail_bounded = true;
    }
    return ev;
}

/// Order of the closed form at sigma0: -2 at the pole e^{-sigma+i theta} = 1,
/// +1 at the zeros where it equals lambda^{+-1}, else 0.
struct ClosedFormValue {
    bool finite = true;
    Cplx value = 1.0;
    int order = 0;  // valuation at this sigma (negative = pole)
};

/// R(sigma) = (1 - lambda z)(1 - lambda^{-1} z) / (1 - z)^2 with
/// z = e^{i theta - sigma} and lambda the signed expanding eigenvalue;
/// obtained by exponentiating -sum_m N_m z^m / m.
inline ClosedFormValue fried_closed_form(const SuspensionModel& A, Cplx sigma) {
    A.validate();
    double lam = A.lambda();
    Cplx z = std::exp(Cplx(0.0, A.theta) - sigma);
    ClosedFormValue out;
    double tol = 1e-12 * (1.0 + std::abs(z));
    int order = 0;
    if (std::abs(Cplx(1.0) - z) < tol) order -= 2;
    if (std::abs(Cplx(1.0) - lam * z) < tol) order += 1;
    if (std::abs(Cplx(1.0) - z / lam) < tol) order += 1;
    if (order != 0 || std::abs(Cplx(1.0) - z) < tol) {
        out.finite = false;
        out.order = order;
        return out;
    }
    out.value = (Cplx(1.0) - lam * z) * (Cplx(1.0) - z / lam) / ((Cplx(1.0) - z) * (Cplx(1.0) - z));
    return out;
}

/// Analytic d/dsigma of log of the closed form.
inline Cplx fried_closed_form_log_derivative(const SuspensionModel& A, Cplx sigma) {
    double lam = A.lambda();
    Cplx z = std::exp(Cplx(0.0, A.theta) - sigma);
    return lam * z / (Cplx(1.0) - lam * z) + (z / lam) / (Cplx(1.0) - z / lam) -
           2.0 * z / (Cplx(1.0) - z);
}

/// Orbit-sum log series (-1)^{n_s} sum_y sum_j (1/j) Tr[hol^j] e^{-j t_y sigma}
/// truncated at total period j t_y <= K; agrees with log of the truncated
/// product up to the (tiny) cross-truncation terms.
inline Cplx fried_log_series(const SuspensionModel& A, Cplx sigma, int K) {
    A.validate();
    auto N = fixed_counts(A, K);
    auto P = primitive_counts(N);
    Cplx s = 0.0;
    for (int d = 1; d <= K; ++d) {
        if (P[static_cast<size_t>(d)] == 0) continue;
        Cplx hol = static_cast<double>(stable_sign(A, d)) * std::exp(Cplx(0.0, d * A.theta));
        double pd = static_cast<double>(P[static_cast<size_t>(d)]);
        for (int j = 1; j * d <= K; ++j) {
            Cplx term = std::pow(hol, j) * std::exp(-static_cast<double>(j * d) * sigma) /
                        static_cast<double>(j);
            s += pd * term;
        }
    }
    return -s;  // (-1)^{n_s} with n_s = 1
}

/// |R_{Z,F}(sigma) - [R_{-Z,F* (x) o(TY)}(sigma)]^{(-1)^{n-1}}| at truncation
/// K.  The reversed product is built from its own ingredients: the inverse
/// matrix, the stable sign of the reversed return maps (the forward unstable
/// direction), the dual twist transported along the reversed orbits, and the
/// orientation twist sign(det A)^k = +1.  n = 3, so the exponent is +1.
inline double duality_check(const SuspensionModel& A, Cplx sigma, int K) {
    A.validate();
    ZetaEvaluation fwd = fried_zeta_truncated(A, sigma, K);

    SuspensionModel Ar = A.reversed();
    Ar.validate();
    auto Nr = fixed_counts(Ar, K);
    auto Pr = primitive_counts(Nr);
    Cplx log_val = 0.0;
    for (int k = 1; k <= K; ++k) {
        if (Pr[static_cast<size_t>(k)] == 0) continue;
        // Stable bundle of the reversed flow = unstable bundle of A; the
        // return map of the reversed flow acts on it by lambda^{-k}, whose
        // sign equals sign(lambda)^k = stable_sign(A, k).
        double s_rev = static_cast<double>(stable_sign(A, k));
        // F^* transported along the reversed orbit has holonomy e^{+ik theta}.
        Cplx hol = s_rev * std::exp(Cplx(0.0, k * A.theta));
        Cplx w = hol * std::exp(-static_cast<double>(k) * sigma);
        log_val += static_cast<double>(Pr[static_cast<size_t>(k)]) * log_one_minus(w);
    }
    Cplx rev = std::exp(log_val);  // exponent (-1)^{n_u+1} = +1
    Cplx powd = rev;               // (-1)^{n-1} = +1 for n = 3
    return std::abs(fwd.value - powd) / (1.0 + std::abs(fwd.value));
}

/// Truncated evaluation with the closed form attached.
inline ZetaEvaluation fried_zeta_with_oracle(const SuspensionModel& A, Cplx sigma, int K) {
    ZetaEvaluation ev = fried_zeta_truncated(A, sigma, K);
    ClosedFormValue cf = fried_closed_form(A, sigma);
    if (cf.finite) {
        ev.closed_form = cf.value;
        ev.has_closed_form = true;
    }
    return ev;
}

}  // namespace torzeta
