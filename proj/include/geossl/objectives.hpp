#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "geossl/util.hpp"

namespace geossl::objectives {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class RegressionKind { mse, logcosh };
RegressionKind regression_kind_from_string(const std::string& s);
std::string to_string(RegressionKind k);

/// Combined objective bookkeeping: total = contrastive + lambda * regression.
struct LossReport {
    double contrastive = 0.0;
    double regression = 0.0;
    double lambda = 1.0;
    double total = 0.0;
};

/// Throws DivergenceError on non-finite inputs.
LossReport combined_loss(double contrastive, double regression, double lambda);

namespace detail {

template <typename T>
Mat<T> row_normalize(const Mat<T>& z, Mat<T>* norms) {
    Mat<T> u = z;
    if (norms) norms->resize(z.rows(), 1);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const T n = z.row(i).norm();
        if (!(n > T(0))) throw ValidationError("zero-norm embedding cannot be normalized");
        u.row(i) /= n;
        if (norms) (*norms)(i, 0) = n;
    }
    return u;
}

/// Pull a gradient w.r.t. unit vectors back through row normalization.
template <typename T>
Mat<T> normalize_backward(const Mat<T>& du, const Mat<T>& u, const Mat<T>& norms) {
    Mat<T> dz(u.rows(), u.cols());
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const T dot = du.row(i).dot(u.row(i));
        dz.row(i) = (du.row(i) - dot * u.row(i)) / norms(i, 0);
    }
    return dz;
}

}  // namespace detail

/// Normalized temperature-scaled cross-entropy over the 2N stacked
/// embeddings: cosine similarities, positives are counterpart views, the
/// denominator excludes self, mean over all 2N anchors.
template <typename T>
T nt_xent(const Mat<T>& z1, const Mat<T>& z2, T temperature, Mat<T>* grad_z1 = nullptr,
          Mat<T>* grad_z2 = nullptr) {
    if (z1.rows() != z2.rows() || z1.cols() != z2.cols())
        throw ShapeError("nt_xent: view batches must have identical shape");
    if (z1.rows() < 1) throw ShapeError("nt_xent: empty batch");
    if (!(temperature > T(0))) throw ValidationError("nt_xent: temperature must be positive");

    const Eigen::Index n = z1.rows();
    const Eigen::Index total = 2 * n;
    Mat<T> z(total, z1.cols());
    z.topRows(n) = z1;
    z.bottomRows(n) = z2;
    Mat<T> norms;
    Mat<T> u = detail::row_normalize(z, &norms);

    Mat<T> sim = (u * u.transpose()) / temperature;
    auto positive_of = [n, total](Eigen::Index i) { return (i + n) % total; };

    T loss = T(0);
    Mat<T> dsim;
    if (grad_z1) dsim = Mat<T>::Zero(total, total);
    for (Eigen::Index i = 0; i < total; ++i) {
        T row_max = -std::numeric_limits<T>::infinity();
        for (Eigen::Index j = 0; j < total; ++j)
            if (j != i) row_max = std::max(row_max, sim(i, j));
        T denom = T(0);
        for (Eigen::Index j = 0; j < total; ++j)
            if (j != i) denom += std::exp(sim(i, j) - row_max);
        const T lse = row_max + std::log(denom);
        loss += lse - sim(i, positive_of(i));
        if (grad_z1) {
            for (Eigen::Index j = 0; j < total; ++j)
                if (j != i) dsim(i, j) = std::exp(sim(i, j) - lse) / T(total);
            dsim(i, positive_of(i)) -= T(1) / T(total);
        }
    }
    loss /= T(total);

    if (grad_z1) {
        Mat<T> du = ((dsim + dsim.transpose()) * u) / temperature;
        Mat<T> dz = detail::normalize_backward(du, u, norms);
        *grad_z1 = dz.topRows(n);
        if (grad_z2) *grad_z2 = dz.bottomRows(n);
    }
    return loss;
}

/// One ordering of the BYOL regression term: mean_i ||p_i/|p_i| - t_i/|t_i|||^2
/// == mean_i (2 - 2 cos). No gradient flows into the target argument; the
/// training loop symmetrizes by calling this twice with the views swapped.
template <typename T>
T byol_loss(const Mat<T>& prediction, const Mat<T>& target_projection,
            Mat<T>* grad_prediction = nullptr) {
    if (prediction.rows() != target_projection.rows() ||
        prediction.cols() != target_projection.cols())
        throw ShapeError("byol_loss: shape mismatch");
    if (prediction.rows() < 1) throw ShapeError("byol_loss: empty batch");
    const Eigen::Index n = prediction.rows();

    Mat<T> pn, tn;
    Mat<T> up = detail::row_normalize(prediction, &pn);
    Mat<T> ut = detail::row_normalize(target_projection, &tn);
    T loss = T(0);
    for (Eigen::Index i = 0; i < n; ++i) loss += T(2) - T(2) * up.row(i).dot(ut.row(i));
    loss /= T(n);

    if (grad_prediction) {
        Mat<T> du = Mat<T>(n, prediction.cols());
        for (Eigen::Index i = 0; i < n; ++i) du.row(i) = -T(2) / T(n) * ut.row(i);
        *grad_prediction = detail::normalize_backward(du, up, pn);
    }
    return loss;
}

/// MSE or logcosh over all components; mean over N*m entries.
/// logcosh(x) = |x| - log 2 + log1p(exp(-2|x|)), stable for any magnitude.
template <typename T>
T param_regression_loss(const Mat<T>& estimate, const Mat<T>& truth, RegressionKind kind,
                        Mat<T>* grad_estimate = nullptr) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw ShapeError("param_regression_loss: shape mismatch");
    const T count = T(estimate.rows()) * T(estimate.cols());
    if (!(count > T(0))) throw ShapeError("param_regression_loss: empty batch");

    T loss = T(0);
    if (grad_estimate) grad_estimate->resize(estimate.rows(), estimate.cols());
    for (Eigen::Index i = 0; i < estimate.rows(); ++i) {
        for (Eigen::Index j = 0; j < estimate.cols(); ++j) {
            const T e = estimate(i, j) - truth(i, j);
            if (kind == RegressionKind::mse) {
                loss += e * e;
                if (grad_estimate) (*grad_estimate)(i, j) = T(2) * e / count;
            } else {
                const T a = std::abs(e);
                loss += a - T(M_LN2) + std::log1p(std::exp(T(-2) * a));
                if (grad_estimate) (*grad_estimate)(i, j) = std::tanh(e) / count;
            }
        }
    }
    return loss / count;
}

/// The deliberately-worse ablation: mean squared error between the two latent
/// batches, enforcing invariance to the spatial transforms.
template <typename T>
T invariant_variant_loss(const Mat<T>& l1, const Mat<T>& l1_prime, Mat<T>* grad_l1 = nullptr,
                         Mat<T>* grad_l1_prime = nullptr) {
    if (l1.rows() != l1_prime.rows() || l1.cols() != l1_prime.cols())
        throw ShapeError("invariant_variant_loss: shape mismatch");
    const T count = T(l1.rows()) * T(l1.cols());
    if (!(count > T(0))) throw ShapeError("invariant_variant_loss: empty batch");
    Mat<T> diff = l1 - l1_prime;
    const T loss = diff.array().square().sum() / count;
    if (grad_l1) *grad_l1 = T(2) / count * diff;
    if (grad_l1_prime) *grad_l1_prime = T(-2) / count * diff;
    return loss;
}

}  // namespace geossl::objectives
