// Fixed-topology feed-forward encoder/decoder pair with hand-derived
// backpropagation, Adam, and binary checkpoint I/O.
//
// Topology (M = 2^k):
//   encoder: one-hot(M) -> dense(M->M) -> dense(M->n) -> batchnorm(n) -> tanh
//   decoder: (n) -> dense(n->M) -> dense(M->M) -> softmax
// There is no nonlinearity between the dense layers. In the binarized phase
// the encoder output passes through sign(.), whose derivative is zero almost
// everywhere, so encoder parameters receive exactly zero gradient.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "binae/errors.hpp"
#include "binae/numerics.hpp"

namespace binae {

enum class Phase : std::uint32_t { continuous = 0, binarized = 1 };
enum class BnMode { train, eval };

struct DenseLayer {
    Matrix w;               // out x in
    std::vector<double> b;  // out

    DenseLayer() = default;
    DenseLayer(std::size_t out, std::size_t in) : w(out, in), b(out, 0.0) {}

    std::size_t in_dim() const { return w.cols(); }
    std::size_t out_dim() const { return w.rows(); }
};

struct BatchNormLayer {
    std::vector<double> gamma, beta, running_mean, running_var;
    double eps = 1e-5;
    double momentum = 0.1;  // running = (1-momentum)*running + momentum*batch

    BatchNormLayer() = default;
    explicit BatchNormLayer(std::size_t n)
        : gamma(n, 1.0), beta(n, 0.0), running_mean(n, 0.0), running_var(n, 1.0) {}

    std::size_t dim() const { return gamma.size(); }
};

struct NetParams {
    int k = 0, n = 0, M = 0;
    DenseLayer enc1, enc2;  // M->M, M->n
    BatchNormLayer bn;      // n
    DenseLayer dec1, dec2;  // n->M, M->M

    NetParams() = default;
    NetParams(int k_, int n_)
        : k(k_),
          n(n_),
          M(1 << k_),
          enc1(std::size_t(1) << k_, std::size_t(1) << k_),
          enc2(n_, std::size_t(1) << k_),
          bn(n_),
          dec1(std::size_t(1) << k_, n_),
          dec2(std::size_t(1) << k_, std::size_t(1) << k_) {
        if (k_ < 1 || n_ < 1) throw ConfigError("NetParams: need k >= 1 and n >= 1");
    }
};

// One buffer per trainable parameter, in the canonical order
// enc1.w, enc1.b, enc2.w, enc2.b, bn.gamma, bn.beta, dec1.w, dec1.b, dec2.w, dec2.b.
struct Gradients {
    Matrix enc1_w, enc2_w, dec1_w, dec2_w;
    std::vector<double> enc1_b, enc2_b, dec1_b, dec2_b, gamma, beta;

    Gradients() = default;
    explicit Gradients(const NetParams& p)
        : enc1_w(p.enc1.w.rows(), p.enc1.w.cols()),
          enc2_w(p.enc2.w.rows(), p.enc2.w.cols()),
          dec1_w(p.dec1.w.rows(), p.dec1.w.cols()),
          dec2_w(p.dec2.w.rows(), p.dec2.w.cols()),
          enc1_b(p.enc1.b.size(), 0.0),
          enc2_b(p.enc2.b.size(), 0.0),
          dec1_b(p.dec1.b.size(), 0.0),
          dec2_b(p.dec2.b.size(), 0.0),
          gamma(p.bn.dim(), 0.0),
          beta(p.bn.dim(), 0.0) {}
};

// Flat views over the trainable arrays, canonical order. The first
// kEncoderArrays entries belong to the encoder side (batch-norm affine
// included, since it sits before the binarizer).
inline constexpr std::size_t kEncoderArrays = 6;

inline std::vector<std::span<double>> trainable_views(NetParams& p) {
    return {p.enc1.w.data(), p.enc1.b, p.enc2.w.data(), p.enc2.b, p.bn.gamma,
            p.bn.beta,       p.dec1.w.data(), p.dec1.b, p.dec2.w.data(), p.dec2.b};
}

inline std::vector<std::span<double>> trainable_views(Gradients& g) {
    return {g.enc1_w.data(), g.enc1_b, g.enc2_w.data(), g.enc2_b, g.gamma,
            g.beta,          g.dec1_w.data(), g.dec1_b, g.dec2_w.data(), g.dec2_b};
}

inline Matrix one_hot(const std::vector<int>& msgs, int M) {
    Matrix u(msgs.size(), M);
    for (std::size_t b = 0; b < msgs.size(); ++b) {
        if (msgs[b] < 0 || msgs[b] >= M) throw std::invalid_argument("one_hot: message id out of range");
        u(b, msgs[b]) = 1.0;
    }
    return u;
}

// Affine map input * W^T + b broadcast over the batch. No nonlinearity.
inline void dense_forward_into(const DenseLayer& l, const Matrix& in, Matrix& out) {
    if (in.cols() != l.in_dim()) throw std::invalid_argument("dense_forward: input width != layer fan-in");
    if (out.rows() != in.rows() || out.cols() != l.out_dim()) out = Matrix(in.rows(), l.out_dim());
    for (std::size_t b = 0; b < in.rows(); ++b) {
        const auto x = in.row(b);
        auto y = out.row(b);
        for (std::size_t o = 0; o < l.out_dim(); ++o) {
            double acc = l.b[o];
            const auto wrow = l.w.row(o);
            for (std::size_t i = 0; i < l.in_dim(); ++i) acc += x[i] * wrow[i];
            y[o] = acc;
        }
    }
}

inline Matrix dense_forward(const DenseLayer& l, const Matrix& in) {
    Matrix out;
    dense_forward_into(l, in, out);
    return out;
}

struct BnCache {
    std::vector<double> mean, var, inv_std;  // batch statistics (train mode)
    Matrix xhat;                             // normalized, pre-affine
};

// Train mode standardizes with biased batch statistics and, when
// update_running is set, folds them into the running estimates. Eval mode is
// a deterministic per-sample map through the running statistics.
inline Matrix batchnorm_forward_cached(BatchNormLayer& l, const Matrix& in, BnMode mode, BnCache& cache,
                                       bool update_running) {
    const std::size_t B = in.rows(), n = in.cols();
    if (n != l.dim()) throw std::invalid_argument("batchnorm_forward: feature count mismatch");
    Matrix out(B, n);
    if (mode == BnMode::eval) {
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t j = 0; j < n; ++j)
                out(b, j) = l.gamma[j] * (in(b, j) - l.running_mean[j]) / std::sqrt(l.running_var[j] + l.eps) +
                            l.beta[j];
        return out;
    }
    if (B < 2) throw std::invalid_argument("batchnorm_forward: train mode needs batch >= 2");
    cache.mean.assign(n, 0.0);
    cache.var.assign(n, 0.0);
    cache.inv_std.assign(n, 0.0);
    cache.xhat = Matrix(B, n);
    for (std::size_t j = 0; j < n; ++j) {
        double m = 0.0;
        for (std::size_t b = 0; b < B; ++b) m += in(b, j);
        m /= double(B);
        double v = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            const double d = in(b, j) - m;
            v += d * d;
        }
        v /= double(B);  // biased
        cache.mean[j] = m;
        cache.var[j] = v;
        cache.inv_std[j] = 1.0 / std::sqrt(v + l.eps);
        for (std::size_t b = 0; b < B; ++b) {
            cache.xhat(b, j) = (in(b, j) - m) * cache.inv_std[j];
            out(b, j) = l.gamma[j] * cache.xhat(b, j) + l.beta[j];
        }
        if (update_running) {
            l.running_mean[j] = (1.0 - l.momentum) * l.running_mean[j] + l.momentum * m;
            l.running_var[j] = (1.0 - l.momentum) * l.running_var[j] + l.momentum * v;
        }
    }
    return out;
}

inline Matrix batchnorm_forward(BatchNormLayer& l, const Matrix& in, BnMode mode) {
    BnCache scratch;
    return batchnorm_forward_cached(l, in, mode, scratch, /*update_running=*/true);
}

inline constexpr double kLogClamp = 1e-12;

// Mean over the batch of -sum_i u_i log(b_i + 1e-12).
inline double cross_entropy(const Matrix& prob, const Matrix& target) {
    if (!prob.same_shape(target)) throw std::invalid_argument("cross_entropy: shape mismatch");
    double loss = 0.0;
    for (std::size_t b = 0; b < prob.rows(); ++b) {
        double rowsum = 0.0, onehot = 0.0;
        for (std::size_t i = 0; i < prob.cols(); ++i) {
            rowsum += prob(b, i);
            onehot += target(b, i);
            if (target(b, i) != 0.0 && target(b, i) != 1.0)
                throw std::invalid_argument("cross_entropy: target rows must be one-hot");
            if (target(b, i) == 1.0) loss -= std::log(prob(b, i) + kLogClamp);
        }
        if (std::abs(rowsum - 1.0) > 1e-9) throw std::invalid_argument("cross_entropy: probability row sum != 1");
        if (onehot != 1.0) throw std::invalid_argument("cross_entropy: target rows must be one-hot");
    }
    return loss / double(prob.rows());
}

// Everything the backward pass needs, plus reusable backward scratch so the
// training loop does not allocate per step.
struct NetCache {
    std::vector<int> msgs;
    Matrix u;       // B x M one-hot
    Matrix h1, h2;  // encoder dense outputs
    BnCache bn;
    Matrix bn_out;
    Matrix xt;      // tanh output, the continuous codeword
    Matrix x;       // channel input (xt, or sign(xt) when binarized)
    Matrix mask;    // B x n of +-1
    Matrix y;       // masked channel output seen by the decoder
    Matrix d1, logits, prob;
    Phase phase = Phase::continuous;
    BnMode bn_mode = BnMode::train;
    bool valid = false;

    Matrix dlogits, dd1, dy, da, dh2, dh1;  // backward scratch
};

// Forward through encoder, mask channel, and decoder. mask must be B x n with
// entries in {-1,+1}. Mutates running batch-norm statistics only when
// bn_mode == train and update_running is set.
inline void net_forward(NetParams& p, const std::vector<int>& msgs, const Matrix& mask, Phase phase, BnMode bn_mode,
                        NetCache& c, bool update_running = true) {
    const std::size_t B = msgs.size();
    if (mask.rows() != B || mask.cols() != std::size_t(p.n))
        throw std::invalid_argument("net_forward: mask shape must be batch x n");
    c.msgs = msgs;
    c.u = one_hot(msgs, p.M);
    // one-hot input: row b of h1 is column msgs[b] of the weight matrix plus bias
    if (c.h1.rows() != B || c.h1.cols() != std::size_t(p.M)) c.h1 = Matrix(B, p.M);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < std::size_t(p.M); ++o) c.h1(b, o) = p.enc1.w(o, msgs[b]) + p.enc1.b[o];
    dense_forward_into(p.enc2, c.h1, c.h2);
    c.bn_out = batchnorm_forward_cached(p.bn, c.h2, bn_mode, c.bn, update_running);
    if (c.xt.rows() != B || c.xt.cols() != std::size_t(p.n)) c.xt = Matrix(B, p.n);
    if (c.x.rows() != B || c.x.cols() != std::size_t(p.n)) c.x = Matrix(B, p.n);
    if (c.y.rows() != B || c.y.cols() != std::size_t(p.n)) c.y = Matrix(B, p.n);
    for (std::size_t i = 0; i < c.xt.data().size(); ++i) {
        const double t = std::tanh(c.bn_out.data()[i]);
        c.xt.data()[i] = t;
        c.x.data()[i] = (phase == Phase::binarized) ? (t < 0.0 ? -1.0 : 1.0) : t;
        c.y.data()[i] = c.x.data()[i] * mask.data()[i];
    }
    c.mask = mask;
    dense_forward_into(p.dec1, c.y, c.d1);
    dense_forward_into(p.dec2, c.d1, c.logits);
    c.prob = c.logits;
    for (std::size_t b = 0; b < B; ++b) softmax_in_place(c.prob.row(b));
    c.phase = phase;
    c.bn_mode = bn_mode;
    c.valid = true;
}

namespace detail {

// dX = dY * W,  dW += dY^T * X,  db += column sums of dY
inline void dense_backward(const DenseLayer& l, const Matrix& x, const Matrix& dy, Matrix& dw,
                           std::vector<double>& db, Matrix* dx) {
    const std::size_t B = dy.rows();
    if (dx && (dx->rows() != B || dx->cols() != l.in_dim())) *dx = Matrix(B, l.in_dim());
    for (std::size_t b = 0; b < B; ++b) {
        const auto dyr = dy.row(b);
        const auto xr = x.row(b);
        for (std::size_t o = 0; o < l.out_dim(); ++o) {
            const double g = dyr[o];
            db[o] += g;
            auto dwr = dw.row(o);
            for (std::size_t i = 0; i < l.in_dim(); ++i) dwr[i] += g * xr[i];
        }
        if (dx) {
            auto dxr = dx->row(b);
            for (std::size_t i = 0; i < l.in_dim(); ++i) {
                double acc = 0.0;
                for (std::size_t o = 0; o < l.out_dim(); ++o) acc += dyr[o] * l.w(o, i);
                dxr[i] = acc;
            }
        }
    }
}

}  // namespace detail

// Exact analytic gradients of the cross-entropy loss for the cached forward
// pass. The combined softmax + cross-entropy gradient at the logits is
// (prob - u) / batch. In the binarized phase the encoder-side buffers are set
// to exactly zero and the batch-norm path is skipped entirely.
inline void net_backward(const NetParams& p, NetCache& c, const Matrix& target, Gradients& g) {
    if (!c.valid) throw std::logic_error("net_backward: no cached forward pass");
    if (!target.same_shape(c.prob)) throw std::invalid_argument("net_backward: target shape mismatch");
    const std::size_t B = c.msgs.size();

    for (auto span : trainable_views(g)) std::fill(span.begin(), span.end(), 0.0);

    Gradients& gm = g;
    NetCache& cm = c;

    if (cm.dlogits.rows() != B || cm.dlogits.cols() != std::size_t(p.M)) cm.dlogits = Matrix(B, p.M);
    for (std::size_t i = 0; i < cm.dlogits.data().size(); ++i)
        cm.dlogits.data()[i] = (c.prob.data()[i] - target.data()[i]) / double(B);

    detail::dense_backward(p.dec2, c.d1, cm.dlogits, gm.dec2_w, gm.dec2_b, &cm.dd1);
    detail::dense_backward(p.dec1, c.y, cm.dd1, gm.dec1_w, gm.dec1_b, &cm.dy);

    if (c.phase == Phase::binarized) return;  // d sign / dx = 0 almost everywhere

    // back through the mask product and tanh
    if (cm.da.rows() != B || cm.da.cols() != std::size_t(p.n)) cm.da = Matrix(B, p.n);
    for (std::size_t i = 0; i < cm.da.data().size(); ++i) {
        const double t = c.xt.data()[i];
        cm.da.data()[i] = cm.dy.data()[i] * c.mask.data()[i] * (1.0 - t * t);
    }

    // batch-norm backward along the batch-statistics path
    if (cm.dh2.rows() != B || cm.dh2.cols() != std::size_t(p.n)) cm.dh2 = Matrix(B, p.n);
    if (c.bn_mode == BnMode::train) {
        for (std::size_t j = 0; j < std::size_t(p.n); ++j) {
            double sum_d = 0.0, sum_dx = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                const double d = cm.da(b, j);
                gm.beta[j] += d;
                gm.gamma[j] += d * c.bn.xhat(b, j);
                sum_d += d * p.bn.gamma[j];
                sum_dx += d * p.bn.gamma[j] * c.bn.xhat(b, j);
            }
            const double scale = c.bn.inv_std[j] / double(B);
            for (std::size_t b = 0; b < B; ++b) {
                const double dxhat = cm.da(b, j) * p.bn.gamma[j];
                cm.dh2(b, j) = scale * (double(B) * dxhat - sum_d - c.bn.xhat(b, j) * sum_dx);
            }
        }
    } else {
        for (std::size_t j = 0; j < std::size_t(p.n); ++j) {
            const double inv = 1.0 / std::sqrt(p.bn.running_var[j] + p.bn.eps);
            for (std::size_t b = 0; b < B; ++b) {
                const double d = cm.da(b, j);
                const double xhat = (c.h2(b, j) - p.bn.running_mean[j]) * inv;
                gm.beta[j] += d;
                gm.gamma[j] += d * xhat;
                cm.dh2(b, j) = d * p.bn.gamma[j] * inv;
            }
        }
    }

    detail::dense_backward(p.enc2, c.h1, cm.dh2, gm.enc2_w, gm.enc2_b, &cm.dh1);
    // one-hot input: dW1 column msgs[b] accumulates row b of dh1
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < std::size_t(p.M); ++o) {
            gm.enc1_w(o, c.msgs[b]) += cm.dh1(b, o);
            gm.enc1_b[o] += cm.dh1(b, o);
        }
}

struct AdamState {
    Gradients m, v;
    std::uint64_t t = 0;
    double lr = 9e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    AdamState() = default;
    AdamState(const NetParams& p, double learning_rate) : m(p), v(p), lr(learning_rate) {}
};

// continuous updates every dense layer but keeps the batch-norm affine pair
// at identity, so the layer normalizes power instead of learning a rescale
// (a trainable scale saturates the tanh and freezes the code geometry early).
// decoder_only additionally freezes the whole encoder side.
enum class UpdateScope { all, continuous, decoder_only };

// Standard bias-corrected Adam update. With decoder_only scope the encoder
// arrays (dense weights and batch-norm affine) are left untouched, moment
// buffers included; the step counter still advances.
inline void adam_step(AdamState& s, NetParams& p, Gradients& g, UpdateScope scope = UpdateScope::all) {
    s.t += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, double(s.t));
    const double bc2 = 1.0 - std::pow(s.beta2, double(s.t));
    auto pv = trainable_views(p);
    auto gv = trainable_views(g);
    auto mv = trainable_views(s.m);
    auto vv = trainable_views(s.v);
    const std::size_t first = (scope == UpdateScope::decoder_only) ? kEncoderArrays : 0;
    for (std::size_t a = first; a < pv.size(); ++a) {
        if (scope == UpdateScope::continuous && (a == kEncoderArrays - 2 || a == kEncoderArrays - 1))
            continue;  // bn gamma/beta
        auto P = pv[a];
        auto G = gv[a];
        auto Mb = mv[a];
        auto Vb = vv[a];
        for (std::size_t i = 0; i < P.size(); ++i) {
            Mb[i] = s.beta1 * Mb[i] + (1.0 - s.beta1) * G[i];
            Vb[i] = s.beta2 * Vb[i] + (1.0 - s.beta2) * G[i] * G[i];
            const double mhat = Mb[i] / bc1;
            const double vhat = Vb[i] / bc2;
            P[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
        }
    }
}

// Glorot-uniform weights, zero biases, identity batch norm, unit running
// variance. Weight matrices are drawn row-major in layer order.
inline NetParams init_params(int k, int n, Rng& rng) {
    NetParams p(k, n);
    auto glorot = [&rng](Matrix& w) {
        const double limit = std::sqrt(6.0 / double(w.rows() + w.cols()));
        for (double& x : w.data()) x = rng.uniform(-limit, limit);
    };
    glorot(p.enc1.w);
    glorot(p.enc2.w);
    glorot(p.dec1.w);
    glorot(p.dec2.w);
    return p;
}

// Checkpoint layout (little-endian): magic "BINAE1", then uint32 k, n, phase,
// uint64 count, then count raw doubles in the order enc1.w, enc1.b, enc2.w,
// enc2.b, bn.gamma, bn.beta, bn.running_mean, bn.running_var, dec1.w,
// dec1.b, dec2.w, dec2.b (matrices row-major).
static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

namespace detail {

inline std::vector<std::span<double>> checkpoint_views(NetParams& p) {
    return {p.enc1.w.data(), p.enc1.b, p.enc2.w.data(), p.enc2.b,
            p.bn.gamma,      p.bn.beta, p.bn.running_mean, p.bn.running_var,
            p.dec1.w.data(), p.dec1.b, p.dec2.w.data(), p.dec2.b};
}

}  // namespace detail

inline void save_checkpoint(const NetParams& params, Phase phase, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ArtifactError("save_checkpoint: cannot open " + path);
    f.write("BINAE1", 6);
    const std::uint32_t k = params.k, n = params.n, ph = static_cast<std::uint32_t>(phase);
    auto views = detail::checkpoint_views(const_cast<NetParams&>(params));
    std::uint64_t count = 0;
    for (const auto& v : views) count += v.size();
    f.write(reinterpret_cast<const char*>(&k), 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&ph), 4);
    f.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& v : views) f.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * 8));
    if (!f) throw ArtifactError("save_checkpoint: write failed on " + path);
}

struct Checkpoint {
    NetParams params;
    Phase phase = Phase::continuous;
};

inline Checkpoint load_checkpoint(const std::string& path,
                                  std::optional<std::pair<int, int>> expect_kn = std::nullopt) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ArtifactError("load_checkpoint: cannot open " + path);
    char magic[6];
    if (!f.read(magic, 6)) throw ArtifactError("load_checkpoint: corrupt file (short magic) " + path);
    if (std::memcmp(magic, "BINAE", 5) != 0) throw ArtifactError("load_checkpoint: corrupt file (bad magic) " + path);
    if (magic[5] != '1')
        throw ArtifactError("load_checkpoint: version mismatch (got BINAE" + std::string(1, magic[5]) + ") " + path);
    std::uint32_t k = 0, n = 0, ph = 0;
    std::uint64_t count = 0;
    if (!f.read(reinterpret_cast<char*>(&k), 4) || !f.read(reinterpret_cast<char*>(&n), 4) ||
        !f.read(reinterpret_cast<char*>(&ph), 4) || !f.read(reinterpret_cast<char*>(&count), 8))
        throw ArtifactError("load_checkpoint: corrupt file (short header) " + path);
    if (k < 1 || k > 20 || n < 1 || n > 4096 || ph > 1)
        throw ArtifactError("load_checkpoint: corrupt file (implausible header) " + path);
    if (expect_kn && (int(k) != expect_kn->first || int(n) != expect_kn->second))
        throw ArtifactError("load_checkpoint: dimension mismatch, file has k=" + std::to_string(k) +
                            " n=" + std::to_string(n) + ", expected k=" + std::to_string(expect_kn->first) +
                            " n=" + std::to_string(expect_kn->second));
    Checkpoint ck;
    ck.params = NetParams(int(k), int(n));
    ck.phase = static_cast<Phase>(ph);
    auto views = detail::checkpoint_views(ck.params);
    std::uint64_t expected = 0;
    for (const auto& v : views) expected += v.size();
    if (count != expected)
        throw ArtifactError("load_checkpoint: corrupt file (parameter count " + std::to_string(count) +
                            ", expected " + std::to_string(expected) + ") " + path);
    for (auto& v : views)
        if (!f.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * 8)))
            throw ArtifactError("load_checkpoint: corrupt file (truncated payload) " + path);
    return ck;
}

}  // namespace binae
