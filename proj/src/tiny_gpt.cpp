#include "distill/tiny_gpt.hpp"
#include "distill/tiny_gpt_debug.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "distill/errors.hpp"
#include "distill/rng.hpp"

namespace distill {

namespace {

constexpr float kRmsEps = 1e-5f;

struct Vocab {
    std::string chars;              // sorted unique bytes seen in the corpus
    std::array<int, 256> to_id{};   // -1 when absent
    int bos = 0, sep = 0, eos = 0, unk = 0;
    int size = 0;

    static Vocab build(const std::vector<TrainingExample>& corpus) {
        std::array<bool, 256> seen{};
        for (const auto& e : corpus) {
            for (unsigned char c : e.context) seen[c] = true;
            for (unsigned char c : e.target) seen[c] = true;
        }
        Vocab v;
        v.to_id.fill(-1);
        for (int c = 0; c < 256; ++c) {
            if (seen[c]) v.chars.push_back(static_cast<char>(c));
        }
        for (int i = 0; i < static_cast<int>(v.chars.size()); ++i) {
            v.to_id[static_cast<unsigned char>(v.chars[i])] = i;
        }
        v.bos = static_cast<int>(v.chars.size());
        v.sep = v.bos + 1;
        v.eos = v.bos + 2;
        v.unk = v.bos + 3;
        v.size = v.bos + 4;
        return v;
    }

    int encode_char(char c) const {
        const int id = to_id[static_cast<unsigned char>(c)];
        return id < 0 ? unk : id;
    }
};

struct Offsets {
    int wte = 0, wpe = 0, head = 0;
    std::vector<int> wq, wk, wv, wo, w1, w2;
    int total = 0;

    static Offsets compute(const TinyGptConfig& cfg, int vocab) {
        Offsets o;
        int cur = 0;
        auto take = [&cur](int n) {
            const int at = cur;
            cur += n;
            return at;
        };
        const int d = cfg.d_model;
        o.wte = take(vocab * d);
        o.wpe = take(cfg.max_positions * d);
        o.head = take(vocab * d);
        for (int l = 0; l < cfg.n_layers; ++l) {
            o.wq.push_back(take(d * d));
            o.wk.push_back(take(d * d));
            o.wv.push_back(take(d * d));
            o.wo.push_back(take(d * d));
            o.w1.push_back(take(cfg.d_ff * d));
            o.w2.push_back(take(d * cfg.d_ff));
        }
        o.total = cur;
        return o;
    }
};

struct Model {
    TinyGptConfig cfg;
    Vocab vocab;
    Offsets off;
    std::vector<float> params;
    std::vector<float> grad;
    std::vector<float> adam_m;
    std::vector<float> adam_v;
    long adam_step = 0;
    std::uint64_t sample_state = 0;
};

Model* model_of(const ModelHandle& m) {
    auto* state = static_cast<Model*>(m.state.get());
    if (state == nullptr) throw ConfigError("tinygpt: handle has no model state");
    return state;
}

std::vector<int> encode_sequence(const Vocab& v, const std::string& context, const std::string& target,
                                 int* sep_index) {
    std::vector<int> ids;
    ids.reserve(context.size() + target.size() + 3);
    ids.push_back(v.bos);
    for (char c : context) ids.push_back(v.encode_char(c));
    *sep_index = static_cast<int>(ids.size());
    ids.push_back(v.sep);
    for (char c : target) ids.push_back(v.encode_char(c));
    ids.push_back(v.eos);
    return ids;
}

// y[o] = sum_i W[o*in + i] * x[i]
inline void matvec(const float* w, const float* x, float* y, int out, int in) {
    for (int o = 0; o < out; ++o) {
        const float* row = w + static_cast<std::size_t>(o) * in;
        float acc = 0.0f;
        for (int i = 0; i < in; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
}

// dW[o*in+i] += dy[o]*x[i];  dx[i] += sum_o W[o*in+i]*dy[o]
inline void matvec_backward(const float* w, const float* x, const float* dy, float* dw, float* dx,
                            int out, int in) {
    for (int o = 0; o < out; ++o) {
        const float g = dy[o];
        if (g == 0.0f) continue;
        const float* row = w + static_cast<std::size_t>(o) * in;
        float* drow = dw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) {
            drow[i] += g * x[i];
            if (dx != nullptr) dx[i] += row[i] * g;
        }
    }
}

inline float rmsnorm_forward(const float* x, float* y, int n) {
    float ms = 0.0f;
    for (int i = 0; i < n; ++i) ms += x[i] * x[i];
    const float r = 1.0f / std::sqrt(ms / static_cast<float>(n) + kRmsEps);
    for (int i = 0; i < n; ++i) y[i] = x[i] * r;
    return r;
}

// dx += r*dy - r^3/n * (dy.x) * x
inline void rmsnorm_backward(const float* x, const float* dy, float r, float* dx, int n) {
    float dot = 0.0f;
    for (int i = 0; i < n; ++i) dot += dy[i] * x[i];
    const float k = r * r * r * dot / static_cast<float>(n);
    for (int i = 0; i < n; ++i) dx[i] += r * dy[i] - k * x[i];
}

// Per-sequence activations kept for the backward pass.
struct LayerActs {
    std::vector<float> xin, a, q, k, v, ctx, xmid, b, fpre, f;
    std::vector<float> r1, r2;
    std::vector<float> att; // n_heads * T * T, causal triangle filled
};

struct Acts {
    int T = 0;
    std::vector<int> tokens;
    std::vector<LayerActs> layers;
    std::vector<float> xfinal, y, logits;
    std::vector<float> r3;
};

void forward(const Model& mdl, const std::vector<int>& tokens, Acts& acts) {
    const auto& cfg = mdl.cfg;
    const int T = static_cast<int>(tokens.size());
    const int D = cfg.d_model;
    const int H = cfg.n_heads;
    const int dh = D / H;
    const int F = cfg.d_ff;
    const int V = mdl.vocab.size;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    const float* P = mdl.params.data();

    if (T > cfg.max_positions) {
        throw ConfigError("tinygpt: sequence of " + std::to_string(T) + " tokens exceeds max_positions=" +
                          std::to_string(cfg.max_positions));
    }

    acts.T = T;
    acts.tokens = tokens;
    acts.layers.resize(cfg.n_layers);
    for (auto& la : acts.layers) {
        la.xin.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.a.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.q.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.k.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.v.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.ctx.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.xmid.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.b.assign(static_cast<std::size_t>(T) * D, 0.0f);
        la.fpre.assign(static_cast<std::size_t>(T) * F, 0.0f);
        la.f.assign(static_cast<std::size_t>(T) * F, 0.0f);
        la.r1.assign(T, 0.0f);
        la.r2.assign(T, 0.0f);
        la.att.assign(static_cast<std::size_t>(H) * T * T, 0.0f);
    }
    acts.xfinal.assign(static_cast<std::size_t>(T) * D, 0.0f);
    acts.y.assign(static_cast<std::size_t>(T) * D, 0.0f);
    acts.r3.assign(T, 0.0f);
    acts.logits.assign(static_cast<std::size_t>(T) * V, 0.0f);

    // Embeddings.
    std::vector<float>& x0 = acts.layers[0].xin;
    for (int t = 0; t < T; ++t) {
        const float* te = P + mdl.off.wte + static_cast<std::size_t>(tokens[t]) * D;
        const float* pe = P + mdl.off.wpe + static_cast<std::size_t>(t) * D;
        float* dst = x0.data() + static_cast<std::size_t>(t) * D;
        for (int i = 0; i < D; ++i) dst[i] = te[i] + pe[i];
    }

    for (int l = 0; l < cfg.n_layers; ++l) {
        LayerActs& la = acts.layers[l];
        for (int t = 0; t < T; ++t) {
            la.r1[t] = rmsnorm_forward(la.xin.data() + static_cast<std::size_t>(t) * D,
                                       la.a.data() + static_cast<std::size_t>(t) * D, D);
            matvec(P + mdl.off.wq[l], la.a.data() + static_cast<std::size_t>(t) * D,
                   la.q.data() + static_cast<std::size_t>(t) * D, D, D);
            matvec(P + mdl.off.wk[l], la.a.data() + static_cast<std::size_t>(t) * D,
                   la.k.data() + static_cast<std::size_t>(t) * D, D, D);
            matvec(P + mdl.off.wv[l], la.a.data() + static_cast<std::size_t>(t) * D,
                   la.v.data() + static_cast<std::size_t>(t) * D, D, D);
        }
        // Causal attention per head.
        for (int h = 0; h < H; ++h) {
            const int hs = h * dh;
            float* att = la.att.data() + static_cast<std::size_t>(h) * T * T;
            for (int t = 0; t < T; ++t) {
                float* row = att + static_cast<std::size_t>(t) * T;
                for (int u = 0; u <= t; ++u) {
                    const float* qt = la.q.data() + static_cast<std::size_t>(t) * D + hs;
                    const float* ku = la.k.data() + static_cast<std::size_t>(u) * D + hs;
                    float s = 0.0f;
                    for (int j = 0; j < dh; ++j) s += qt[j] * ku[j];
                    row[u] = s * scale;
                }
                float maxv = row[0];
                for (int u = 1; u <= t; ++u) maxv = std::max(maxv, row[u]);
                float denom = 0.0f;
                for (int u = 0; u <= t; ++u) {
                    row[u] = std::exp(row[u] - maxv);
                    denom += row[u];
                }
                const float inv = 1.0f / denom;
                for (int u = 0; u <= t; ++u) row[u] *= inv;
                float* ct = la.ctx.data() + static_cast<std::size_t>(t) * D + hs;
                for (int j = 0; j < dh; ++j) {
                    float acc = 0.0f;
                    for (int u = 0; u <= t; ++u) {
                        acc += row[u] * la.v[static_cast<std::size_t>(u) * D + hs + j];
                    }
                    ct[j] = acc;
                }
            }
        }
        // Output projection + residual, then the MLP block.
        std::vector<float>& xout =
            (l + 1 < cfg.n_layers) ? acts.layers[l + 1].xin : acts.xfinal;
        std::vector<float> proj(D);
        for (int t = 0; t < T; ++t) {
            matvec(P + mdl.off.wo[l], la.ctx.data() + static_cast<std::size_t>(t) * D, proj.data(), D, D);
            float* xm = la.xmid.data() + static_cast<std::size_t>(t) * D;
            const float* xi = la.xin.data() + static_cast<std::size_t>(t) * D;
            for (int i = 0; i < D; ++i) xm[i] = xi[i] + proj[i];

            la.r2[t] = rmsnorm_forward(xm, la.b.data() + static_cast<std::size_t>(t) * D, D);
            matvec(P + mdl.off.w1[l], la.b.data() + static_cast<std::size_t>(t) * D,
                   la.fpre.data() + static_cast<std::size_t>(t) * F, F, D);
            float* fp = la.fpre.data() + static_cast<std::size_t>(t) * F;
            float* f = la.f.data() + static_cast<std::size_t>(t) * F;
            for (int o = 0; o < F; ++o) f[o] = fp[o] > 0.0f ? fp[o] : 0.0f;
            matvec(P + mdl.off.w2[l], f, proj.data(), D, F);
            float* xo = xout.data() + static_cast<std::size_t>(t) * D;
            for (int i = 0; i < D; ++i) xo[i] = xm[i] + proj[i];
        }
    }

    for (int t = 0; t < T; ++t) {
        acts.r3[t] = rmsnorm_forward(acts.xfinal.data() + static_cast<std::size_t>(t) * D,
                                     acts.y.data() + static_cast<std::size_t>(t) * D, D);
        matvec(P + mdl.off.head, acts.y.data() + static_cast<std::size_t>(t) * D,
               acts.logits.data() + static_cast<std::size_t>(t) * V, V, D);
    }
}

// Mean NLL over positions sep..T-2 (predicting target chars and EOS).
double sequence_loss(const Model& mdl, const Acts& acts, int sep_index,
                     std::vector<float>* dlogits) {
    const int T = acts.T;
    const int V = mdl.vocab.size;
    const int first = sep_index;
    const int last = T - 2;
    const int count = last - first + 1;
    if (count <= 0) return 0.0;
    if (dlogits) dlogits->assign(static_cast<std::size_t>(T) * V, 0.0f);

    double total = 0.0;
    std::vector<float> probs(V);
    for (int t = first; t <= last; ++t) {
        const float* lg = acts.logits.data() + static_cast<std::size_t>(t) * V;
        float maxv = lg[0];
        for (int w = 1; w < V; ++w) maxv = std::max(maxv, lg[w]);
        float denom = 0.0f;
        for (int w = 0; w < V; ++w) {
            probs[w] = std::exp(lg[w] - maxv);
            denom += probs[w];
        }
        const float inv = 1.0f / denom;
        const int target = acts.tokens[t + 1];
        for (int w = 0; w < V; ++w) probs[w] *= inv;
        total += -std::log(std::max(1e-12, static_cast<double>(probs[target])));
        if (dlogits) {
            float* dl = dlogits->data() + static_cast<std::size_t>(t) * V;
            const float w_scale = 1.0f / static_cast<float>(count);
            for (int w = 0; w < V; ++w) dl[w] = probs[w] * w_scale;
            dl[target] -= w_scale;
        }
    }
    return total / count;
}

// Accumulates parameter gradients for one sequence; dlogits carries the
// example weighting already.
void backward(Model& mdl, const Acts& acts, const std::vector<float>& dlogits, float example_scale) {
    const auto& cfg = mdl.cfg;
    const int T = acts.T;
    const int D = cfg.d_model;
    const int H = cfg.n_heads;
    const int dh = D / H;
    const int F = cfg.d_ff;
    const int V = mdl.vocab.size;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    const float* P = mdl.params.data();
    float* G = mdl.grad.data();

    std::vector<float> dx(static_cast<std::size_t>(T) * D, 0.0f);
    std::vector<float> dy(D);

    // Head and final norm.
    for (int t = 0; t < T; ++t) {
        const float* dl = dlogits.data() + static_cast<std::size_t>(t) * V;
        bool any = false;
        for (int w = 0; w < V; ++w) {
            if (dl[w] != 0.0f) {
                any = true;
                break;
            }
        }
        if (!any) continue;
        std::fill(dy.begin(), dy.end(), 0.0f);
        std::vector<float> scaled(V);
        for (int w = 0; w < V; ++w) scaled[w] = dl[w] * example_scale;
        matvec_backward(P + mdl.off.head, acts.y.data() + static_cast<std::size_t>(t) * D, scaled.data(),
                        G + mdl.off.head, dy.data(), V, D);
        rmsnorm_backward(acts.xfinal.data() + static_cast<std::size_t>(t) * D, dy.data(), acts.r3[t],
                         dx.data() + static_cast<std::size_t>(t) * D, D);
    }

    std::vector<float> da(static_cast<std::size_t>(T) * D);
    std::vector<float> dq(static_cast<std::size_t>(T) * D);
    std::vector<float> dk(static_cast<std::size_t>(T) * D);
    std::vector<float> dv(static_cast<std::size_t>(T) * D);
    std::vector<float> dctx(static_cast<std::size_t>(T) * D);
    std::vector<float> dxmid(static_cast<std::size_t>(T) * D);
    std::vector<float> db(D);
    std::vector<float> dfpre(F);
    std::vector<float> df(F);

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const LayerActs& la = acts.layers[l];
        std::fill(da.begin(), da.end(), 0.0f);
        std::fill(dq.begin(), dq.end(), 0.0f);
        std::fill(dk.begin(), dk.end(), 0.0f);
        std::fill(dv.begin(), dv.end(), 0.0f);
        std::fill(dctx.begin(), dctx.end(), 0.0f);
        std::fill(dxmid.begin(), dxmid.end(), 0.0f);

        // MLP block backward: dx holds d(xout).
        for (int t = 0; t < T; ++t) {
            const float* dxo = dx.data() + static_cast<std::size_t>(t) * D;
            float* dxm = dxmid.data() + static_cast<std::size_t>(t) * D;
            for (int i = 0; i < D; ++i) dxm[i] = dxo[i]; // residual path

            std::fill(df.begin(), df.end(), 0.0f);
            matvec_backward(P + mdl.off.w2[l], la.f.data() + static_cast<std::size_t>(t) * F, dxo,
                            G + mdl.off.w2[l], df.data(), D, F);
            const float* fp = la.fpre.data() + static_cast<std::size_t>(t) * F;
            for (int o = 0; o < F; ++o) dfpre[o] = fp[o] > 0.0f ? df[o] : 0.0f;
            std::fill(db.begin(), db.end(), 0.0f);
            matvec_backward(P + mdl.off.w1[l], la.b.data() + static_cast<std::size_t>(t) * D, dfpre.data(),
                            G + mdl.off.w1[l], db.data(), F, D);
            rmsnorm_backward(la.xmid.data() + static_cast<std::size_t>(t) * D, db.data(), la.r2[t], dxm, D);
        }

        // Attention output projection backward: dxmid -> dctx and residual to dxin.
        std::fill(dx.begin(), dx.end(), 0.0f); // becomes d(xin)
        for (int t = 0; t < T; ++t) {
            const float* dxm = dxmid.data() + static_cast<std::size_t>(t) * D;
            float* dxi = dx.data() + static_cast<std::size_t>(t) * D;
            for (int i = 0; i < D; ++i) dxi[i] = dxm[i]; // residual path
            matvec_backward(P + mdl.off.wo[l], la.ctx.data() + static_cast<std::size_t>(t) * D, dxm,
                            G + mdl.off.wo[l], dctx.data() + static_cast<std::size_t>(t) * D, D, D);
        }

        // Attention core backward.
        for (int h = 0; h < H; ++h) {
            const int hs = h * dh;
            const float* att = la.att.data() + static_cast<std::size_t>(h) * T * T;
            for (int t = 0; t < T; ++t) {
                const float* row = att + static_cast<std::size_t>(t) * T;
                const float* dct = dctx.data() + static_cast<std::size_t>(t) * D + hs;

                // datt[u] and the softmax Jacobian.
                float dot = 0.0f;
                std::vector<float> datt(t + 1);
                for (int u = 0; u <= t; ++u) {
                    const float* vu = la.v.data() + static_cast<std::size_t>(u) * D + hs;
                    float acc = 0.0f;
                    for (int j = 0; j < dh; ++j) acc += dct[j] * vu[j];
                    datt[u] = acc;
                    dot += row[u] * acc;
                    float* dvu = dv.data() + static_cast<std::size_t>(u) * D + hs;
                    for (int j = 0; j < dh; ++j) dvu[j] += row[u] * dct[j];
                }
                for (int u = 0; u <= t; ++u) {
                    const float ds = row[u] * (datt[u] - dot) * scale;
                    if (ds == 0.0f) continue;
                    const float* ku = la.k.data() + static_cast<std::size_t>(u) * D + hs;
                    const float* qt = la.q.data() + static_cast<std::size_t>(t) * D + hs;
                    float* dqt = dq.data() + static_cast<std::size_t>(t) * D + hs;
                    float* dku = dk.data() + static_cast<std::size_t>(u) * D + hs;
                    for (int j = 0; j < dh; ++j) {
                        dqt[j] += ds * ku[j];
                        dku[j] += ds * qt[j];
                    }
                }
            }
        }

        // QKV projections backward into da, then the first norm into dxin.
        for (int t = 0; t < T; ++t) {
            float* dat = da.data() + static_cast<std::size_t>(t) * D;
            matvec_backward(P + mdl.off.wq[l], la.a.data() + static_cast<std::size_t>(t) * D,
                            dq.data() + static_cast<std::size_t>(t) * D, G + mdl.off.wq[l], dat, D, D);
            matvec_backward(P + mdl.off.wk[l], la.a.data() + static_cast<std::size_t>(t) * D,
                            dk.data() + static_cast<std::size_t>(t) * D, G + mdl.off.wk[l], dat, D, D);
            matvec_backward(P + mdl.off.wv[l], la.a.data() + static_cast<std::size_t>(t) * D,
                            dv.data() + static_cast<std::size_t>(t) * D, G + mdl.off.wv[l], dat, D, D);
            rmsnorm_backward(la.xin.data() + static_cast<std::size_t>(t) * D, dat, la.r1[t],
                             dx.data() + static_cast<std::size_t>(t) * D, D);
        }
    }

    // Embedding gradients.
    for (int t = 0; t < T; ++t) {
        const float* dxt = dx.data() + static_cast<std::size_t>(t) * D;
        float* gte = G + mdl.off.wte + static_cast<std::size_t>(acts.tokens[t]) * D;
        float* gpe = G + mdl.off.wpe + static_cast<std::size_t>(t) * D;
        for (int i = 0; i < D; ++i) {
            gte[i] += dxt[i];
            gpe[i] += dxt[i];
        }
    }
}

void adam_apply(Model& mdl, double base_lr) {
    mdl.adam_step += 1;
    const double warm = mdl.cfg.warmup_steps > 0
                            ? std::min(1.0, static_cast<double>(mdl.adam_step) / mdl.cfg.warmup_steps)
                            : 1.0;
    const double lr = base_lr * warm;
    constexpr double b1 = 0.9, b2 = 0.99, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(mdl.adam_step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(mdl.adam_step));

    // Global-norm clipping.
    double norm_sq = 0.0;
    for (float g : mdl.grad) norm_sq += static_cast<double>(g) * g;
    const double norm = std::sqrt(norm_sq);
    const float clip_scale =
        (mdl.cfg.grad_clip > 0 && norm > mdl.cfg.grad_clip)
            ? static_cast<float>(mdl.cfg.grad_clip / norm)
            : 1.0f;

    for (std::size_t i = 0; i < mdl.params.size(); ++i) {
        const double g = static_cast<double>(mdl.grad[i]) * clip_scale;
        mdl.adam_m[i] = static_cast<float>(b1 * mdl.adam_m[i] + (1.0 - b1) * g);
        mdl.adam_v[i] = static_cast<float>(b2 * mdl.adam_v[i] + (1.0 - b2) * g * g);
        const double mhat = mdl.adam_m[i] / bc1;
        const double vhat = mdl.adam_v[i] / bc2;
        mdl.params[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps));
    }
    std::fill(mdl.grad.begin(), mdl.grad.end(), 0.0f);
}

// Incremental decode state: per-layer key/value caches.
struct GenCache {
    std::vector<std::vector<float>> k, v; // [layer][pos*D]
    int len = 0;
};

// Runs one token through the stack, returning logits for its position.
void infer_step(const Model& mdl, int token, GenCache& cache, std::vector<float>& logits) {
    const auto& cfg = mdl.cfg;
    const int D = cfg.d_model;
    const int H = cfg.n_heads;
    const int dh = D / H;
    const int F = cfg.d_ff;
    const int V = mdl.vocab.size;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
    const float* P = mdl.params.data();
    const int t = cache.len;

    std::vector<float> x(D), a(D), q(D), kv(D), ctx(D), f(F), proj(D);
    const float* te = P + mdl.off.wte + static_cast<std::size_t>(token) * D;
    const float* pe = P + mdl.off.wpe + static_cast<std::size_t>(t) * D;
    for (int i = 0; i < D; ++i) x[i] = te[i] + pe[i];

    for (int l = 0; l < cfg.n_layers; ++l) {
        rmsnorm_forward(x.data(), a.data(), D);
        matvec(P + mdl.off.wq[l], a.data(), q.data(), D, D);
        matvec(P + mdl.off.wk[l], a.data(), kv.data(), D, D);
        std::vector<float>& kc = cache.k[l];
        std::vector<float>& vc = cache.v[l];
        kc.resize(static_cast<std::size_t>(t + 1) * D);
        vc.resize(static_cast<std::size_t>(t + 1) * D);
        std::memcpy(kc.data() + static_cast<std::size_t>(t) * D, kv.data(), sizeof(float) * D);
        matvec(P + mdl.off.wv[l], a.data(), kv.data(), D, D);
        std::memcpy(vc.data() + static_cast<std::size_t>(t) * D, kv.data(), sizeof(float) * D);

        for (int h = 0; h < H; ++h) {
            const int hs = h * dh;
            std::vector<float> att(t + 1);
            for (int u = 0; u <= t; ++u) {
                const float* ku = kc.data() + static_cast<std::size_t>(u) * D + hs;
                float s = 0.0f;
                for (int j = 0; j < dh; ++j) s += q[hs + j] * ku[j];
                att[u] = s * scale;
            }
            float maxv = att[0];
            for (int u = 1; u <= t; ++u) maxv = std::max(maxv, att[u]);
            float denom = 0.0f;
            for (int u = 0; u <= t; ++u) {
                att[u] = std::exp(att[u] - maxv);
                denom += att[u];
            }
            const float inv = 1.0f / denom;
            for (int j = 0; j < dh; ++j) {
                float acc = 0.0f;
                for (int u = 0; u <= t; ++u) {
                    acc += att[u] * inv * vc[static_cast<std::size_t>(u) * D + hs + j];
                }
                ctx[hs + j] = acc;
            }
        }
        matvec(P + mdl.off.wo[l], ctx.data(), proj.data(), D, D);
        for (int i = 0; i < D; ++i) x[i] += proj[i];

        rmsnorm_forward(x.data(), a.data(), D);
        matvec(P + mdl.off.w1[l], a.data(), f.data(), F, D);
        for (int o = 0; o < F; ++o) f[o] = f[o] > 0.0f ? f[o] : 0.0f;
        matvec(P + mdl.off.w2[l], f.data(), proj.data(), D, F);
        for (int i = 0; i < D; ++i) x[i] += proj[i];
    }

    rmsnorm_forward(x.data(), a.data(), D);
    logits.assign(V, 0.0f);
    matvec(P + mdl.off.head, a.data(), logits.data(), V, D);
    cache.len += 1;
}

} // namespace

ModelHandle TinyGptBackend::init(const std::vector<TrainingExample>& corpus, const Hyperparams& h) {
    if (corpus.empty()) throw ConfigError("tinygpt: cannot initialize from an empty corpus");
    auto mdl = std::make_shared<Model>();
    mdl->cfg = cfg_;
    if (mdl->cfg.max_positions < h.max_seq_len + 3) {
        mdl->cfg.max_positions = h.max_seq_len + 3; // BOS + SEP + EOS
    }
    mdl->vocab = Vocab::build(corpus);
    mdl->off = Offsets::compute(mdl->cfg, mdl->vocab.size);
    mdl->params.resize(mdl->off.total);
    mdl->grad.assign(mdl->off.total, 0.0f);
    mdl->adam_m.assign(mdl->off.total, 0.0f);
    mdl->adam_v.assign(mdl->off.total, 0.0f);
    Rng rng(h.seed ^ 0x7469677074ULL);
    for (auto& p : mdl->params) {
        p = static_cast<float>(rng.next_gaussian() * mdl->cfg.init_std);
    }
    mdl->sample_state = h.seed * 0x9e3779b97f4a7c15ULL + 1;

    ModelHandle handle;
    handle.backend = id();
    handle.tag = corpus.front().meta.config;
    handle.state = mdl;
    return handle;
}

void TinyGptBackend::advance(ModelHandle& m, const std::vector<TrainingExample>& corpus,
                             const Hyperparams& h, int iterations) {
    Model& mdl = *model_of(m);
    if (corpus.empty()) throw ConfigError("tinygpt: cannot train on an empty corpus");
    Rng rng(mdl.sample_state);

    Acts acts;
    std::vector<float> dlogits;
    for (int iter = 0; iter < iterations; ++iter) {
        const int batch = std::min<int>(h.batch_size, static_cast<int>(corpus.size()));
        for (int b = 0; b < batch; ++b) {
            const auto& ex = corpus[rng.next_below(corpus.size())];
            int sep_index = 0;
            const auto tokens = encode_sequence(mdl.vocab, ex.context, ex.target, &sep_index);
            forward(mdl, tokens, acts);
            sequence_loss(mdl, acts, sep_index, &dlogits);
            backward(mdl, acts, dlogits, 1.0f / static_cast<float>(batch));
        }
        adam_apply(mdl, h.learning_rate);
    }
    mdl.sample_state = rng.next_u64();
}

ModelHandle TinyGptBackend::snapshot(const ModelHandle& m) const {
    const Model& src = *model_of(m);
    auto copy = std::make_shared<Model>(src);
    ModelHandle handle = m;
    handle.state = copy;
    return handle;
}

double TinyGptBackend::loss(const ModelHandle& m, const TrainingExample& example) const {
    const Model& mdl = *model_of(m);
    int sep_index = 0;
    const auto tokens = encode_sequence(mdl.vocab, example.context, example.target, &sep_index);
    Acts acts;
    forward(mdl, tokens, acts);
    return sequence_loss(mdl, acts, sep_index, nullptr);
}

std::string TinyGptBackend::generate(const ModelHandle& m, const std::string& context,
                                     const SamplingConfig& sampling) const {
    const Model& mdl = *model_of(m);
    GenCache cache;
    cache.k.resize(mdl.cfg.n_layers);
    cache.v.resize(mdl.cfg.n_layers);

    std::vector<int> prefix;
    prefix.push_back(mdl.vocab.bos);
    for (char c : context) prefix.push_back(mdl.vocab.encode_char(c));
    prefix.push_back(mdl.vocab.sep);
    // Long contexts keep their tail; the recent window matters most.
    const int budget = mdl.cfg.max_positions - 1;
    if (static_cast<int>(prefix.size()) > budget) {
        std::vector<int> tail(prefix.end() - budget, prefix.end());
        prefix = std::move(tail);
    }

    std::vector<float> logits;
    for (int id : prefix) infer_step(mdl, id, cache, logits);

    Rng rng(sampling.seed.value_or(0) ^ 0x67656e65ULL);
    std::string out;
    const int max_new = std::min(sampling.max_tokens, mdl.cfg.max_positions - static_cast<int>(prefix.size()));
    for (int step = 0; step < max_new; ++step) {
        int next = 0;
        if (sampling.temperature <= 0.0) {
            float best = logits[0];
            for (int w = 1; w < mdl.vocab.size; ++w) {
                if (logits[w] > best) {
                    best = logits[w];
                    next = w;
                }
            }
        } else {
            const float inv_t = static_cast<float>(1.0 / sampling.temperature);
            float maxv = logits[0] * inv_t;
            for (int w = 1; w < mdl.vocab.size; ++w) maxv = std::max(maxv, logits[w] * inv_t);
            std::vector<double> probs(mdl.vocab.size);
            double denom = 0.0;
            for (int w = 0; w < mdl.vocab.size; ++w) {
                probs[w] = std::exp(static_cast<double>(logits[w] * inv_t - maxv));
                denom += probs[w];
            }
            double r = rng.next_double() * denom;
            next = mdl.vocab.size - 1;
            for (int w = 0; w < mdl.vocab.size; ++w) {
                r -= probs[w];
                if (r <= 0.0) {
                    next = w;
                    break;
                }
            }
        }
        if (next == mdl.vocab.eos || next == mdl.vocab.bos || next == mdl.vocab.sep) break;
        if (next == mdl.vocab.unk) {
            // Nothing sensible to emit; stop rather than loop on unknowns.
            break;
        }
        out.push_back(mdl.vocab.chars[next]);

        bool stopped = false;
        for (const auto& stop : sampling.stop_sequences) {
            if (!stop.empty() && out.size() >= stop.size() &&
                out.compare(out.size() - stop.size(), stop.size(), stop) == 0) {
                out.erase(out.size() - stop.size());
                stopped = true;
                break;
            }
        }
        if (stopped) break;
        if (cache.len >= mdl.cfg.max_positions) break;
        infer_step(mdl, next, cache, logits);
    }
    return out;
}

void TinyGptBackend::save(const ModelHandle& m, const std::string& path) const {
    const Model& mdl = *model_of(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("tinygpt: cannot write checkpoint: " + path);
    const char magic[8] = {'T', 'G', 'P', 'T', '0', '0', '0', '1'};
    out.write(magic, sizeof(magic));
    auto write_i32 = [&out](int v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    write_i32(mdl.cfg.d_model);
    write_i32(mdl.cfg.n_layers);
    write_i32(mdl.cfg.n_heads);
    write_i32(mdl.cfg.d_ff);
    write_i32(mdl.cfg.max_positions);
    write_i32(static_cast<int>(mdl.vocab.chars.size()));
    out.write(mdl.vocab.chars.data(), static_cast<std::streamsize>(mdl.vocab.chars.size()));
    const int tag_len = static_cast<int>(m.tag.size());
    write_i32(tag_len);
    out.write(m.tag.data(), tag_len);
    const long long step = mdl.adam_step;
    out.write(reinterpret_cast<const char*>(&step), sizeof(step));
    write_i32(static_cast<int>(mdl.params.size()));
    out.write(reinterpret_cast<const char*>(mdl.params.data()),
              static_cast<std::streamsize>(mdl.params.size() * sizeof(float)));
}

ModelHandle TinyGptBackend::load(const std::string& path) const {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("tinygpt: cannot read checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, "TGPT0001", 8) != 0) {
        throw StalenessError("checkpoint at " + path + " was not written by the tinygpt backend");
    }
    auto mdl = std::make_shared<Model>();
    auto read_i32 = [&in]() {
        int v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    };
    mdl->cfg = cfg_;
    mdl->cfg.d_model = read_i32();
    mdl->cfg.n_layers = read_i32();
    mdl->cfg.n_heads = read_i32();
    mdl->cfg.d_ff = read_i32();
    mdl->cfg.max_positions = read_i32();
    const int vocab_chars = read_i32();
    std::string chars(vocab_chars, '\0');
    in.read(chars.data(), vocab_chars);
    mdl->vocab.to_id.fill(-1);
    mdl->vocab.chars = chars;
    for (int i = 0; i < vocab_chars; ++i) {
        mdl->vocab.to_id[static_cast<unsigned char>(chars[i])] = i;
    }
    mdl->vocab.bos = vocab_chars;
    mdl->vocab.sep = vocab_chars + 1;
    mdl->vocab.eos = vocab_chars + 2;
    mdl->vocab.unk = vocab_chars + 3;
    mdl->vocab.size = vocab_chars + 4;
    const int tag_len = read_i32();
    std::string tag(tag_len, '\0');
    in.read(tag.data(), tag_len);
    long long step = 0;
    in.read(reinterpret_cast<char*>(&step), sizeof(step));
    mdl->adam_step = step;
    const int n_params = read_i32();
    mdl->off = Offsets::compute(mdl->cfg, mdl->vocab.size);
    if (n_params != mdl->off.total) {
        throw StalenessError("checkpoint at " + path + " disagrees with its own dimensions");
    }
    mdl->params.resize(n_params);
    in.read(reinterpret_cast<char*>(mdl->params.data()),
            static_cast<std::streamsize>(static_cast<std::size_t>(n_params) * sizeof(float)));
    if (!in) throw StalenessError("checkpoint at " + path + " is truncated");
    mdl->grad.assign(n_params, 0.0f);
    mdl->adam_m.assign(n_params, 0.0f);
    mdl->adam_v.assign(n_params, 0.0f);

    ModelHandle handle;
    handle.backend = id();
    handle.tag = tag;
    handle.state = mdl;
    return handle;
}

std::size_t TinyGptBackend::parameter_count(const ModelHandle& m) {
    return model_of(m)->params.size();
}

namespace tinygpt_debug {

double example_loss(const ModelHandle& m, const TrainingExample& example) {
    const Model& mdl = *model_of(m);
    int sep_index = 0;
    const auto tokens = encode_sequence(mdl.vocab, example.context, example.target, &sep_index);
    Acts acts;
    forward(mdl, tokens, acts);
    return sequence_loss(mdl, acts, sep_index, nullptr);
}

std::vector<float> example_gradient(const ModelHandle& m, const TrainingExample& example) {
    Model& mdl = *model_of(m);
    std::fill(mdl.grad.begin(), mdl.grad.end(), 0.0f);
    int sep_index = 0;
    const auto tokens = encode_sequence(mdl.vocab, example.context, example.target, &sep_index);
    Acts acts;
    forward(mdl, tokens, acts);
    std::vector<float> dlogits;
    sequence_loss(mdl, acts, sep_index, &dlogits);
    backward(mdl, acts, dlogits, 1.0f);
    std::vector<float> out = mdl.grad;
    std::fill(mdl.grad.begin(), mdl.grad.end(), 0.0f);
    return out;
}

std::vector<float>& parameters(const ModelHandle& m) { return model_of(m)->params; }

} // namespace tinygpt_debug

} // namespace distill
