#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slidemil/autodiff.hpp"
#include "slidemil/binio.hpp"
#include "slidemil/rng.hpp"

namespace slidemil {

enum class Arch : std::uint8_t { amil = 0, admil = 1, hybrid = 2 };

inline const char* to_string(Arch a) {
    switch (a) {
        case Arch::amil: return "amil";
        case Arch::admil: return "admil";
        case Arch::hybrid: return "hybrid";
    }
    return "?";
}

inline Arch arch_from_string(const std::string& s) {
    if (s == "amil") return Arch::amil;
    if (s == "admil") return Arch::admil;
    if (s == "hybrid") return Arch::hybrid;
    throw ConfigError("unknown architecture: " + s);
}

// One fully-connected layer: weight [in x out], bias [1 x out].
struct Dense {
    Param weight;
    Param bias;
};

// Gated attention scorer of the original attention-MIL: score_i = w^T tanh(V h_i^T).
struct TanhAttentionParams {
    Param V;  // [L x M]
    Param w;  // [L x 1]
};

// Two FC layers with LeakyReLU between, scoring each instance: M -> L -> 1.
struct LeakyAttentionParams {
    Dense fc1;
    Dense fc2;
};

// Head after pooling: for amil a chain ending in one logit, for the additive
// models a chain ending in one logit per class (2). Hidden layers use tanh.
struct MlpHead {
    std::vector<Dense> layers;
};

struct MilModel {
    Arch arch = Arch::amil;
    std::size_t embed_dim = 0;   // M
    std::size_t attn_dim = 0;    // L
    TanhAttentionParams tanh_attn;
    LeakyAttentionParams leaky_attn;
    MlpHead head;

    std::vector<Param*> parameters() {
        std::vector<Param*> ps;
        if (arch == Arch::amil || arch == Arch::hybrid) {
            ps.push_back(&tanh_attn.V);
            ps.push_back(&tanh_attn.w);
        }
        if (arch == Arch::admil) {
            ps.push_back(&leaky_attn.fc1.weight);
            ps.push_back(&leaky_attn.fc1.bias);
            ps.push_back(&leaky_attn.fc2.weight);
            ps.push_back(&leaky_attn.fc2.bias);
        }
        for (Dense& d : head.layers) {
            ps.push_back(&d.weight);
            ps.push_back(&d.bias);
        }
        return ps;
    }

    void zero_grads() {
        for (Param* p : parameters()) p->zero_grad();
    }
};

// Forward result with plain values extracted from the tape.
struct BagOutput {
    double bag_prob = 0.0;
    std::vector<double> attention;
    std::optional<std::vector<double>> patch_logits;     // positive class, additive models
    std::optional<std::vector<double>> bounded_contribs; // sigmoid of patch_logits
};

namespace detail {

inline Tensor2D init_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
    Tensor2D t(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.values) v = rng.uniform(-bound, bound);
    return t;
}

inline Dense init_dense(std::size_t in, std::size_t out, Rng& rng) {
    Dense d;
    d.weight = Param(init_uniform(in, out, in, rng));
    d.bias = Param(init_uniform(1, out, in, rng));
    return d;
}

}  // namespace detail

// hidden_head: optional hidden widths for the classifier / patch-score head.
// Default is the single linear layer reading of both architectures.
inline MilModel make_model(Arch arch, std::size_t embed_dim, std::size_t attn_dim,
                           std::uint64_t seed, const std::vector<std::size_t>& hidden_head = {}) {
    if (embed_dim < 1 || attn_dim < 1) throw ConfigError("model dims must be >= 1");
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(arch)));
    MilModel m;
    m.arch = arch;
    m.embed_dim = embed_dim;
    m.attn_dim = attn_dim;
    if (arch == Arch::amil || arch == Arch::hybrid) {
        m.tanh_attn.V = Param(detail::init_uniform(attn_dim, embed_dim, embed_dim, rng));
        m.tanh_attn.w = Param(detail::init_uniform(attn_dim, 1, attn_dim, rng));
    }
    if (arch == Arch::admil) {
        m.leaky_attn.fc1 = detail::init_dense(embed_dim, attn_dim, rng);
        m.leaky_attn.fc2 = detail::init_dense(attn_dim, 1, rng);
    }
    const std::size_t out_dim = arch == Arch::amil ? 1 : 2;
    std::size_t in = embed_dim;
    for (std::size_t width : hidden_head) {
        m.head.layers.push_back(detail::init_dense(in, width, rng));
        in = width;
    }
    m.head.layers.push_back(detail::init_dense(in, out_dim, rng));
    return m;
}

// Tape handles to the interesting nodes of one bag forward.
struct ForwardVars {
    Var bag_prob = -1;           // 1 x 1
    Var attention = -1;          // n x 1, on the simplex
    Var patch_logits_pos = -1;   // n x 1, additive models only
    Var class_scores = -1;       // 1 x 2 pre-softmax, additive models only
};

namespace detail {

inline Var attention_scores_tanh(Tape& t, Var H, TanhAttentionParams& p) {
    // tanh(H V^T) w  ==  per-instance w^T tanh(V h_i^T)
    Var vt = t.transpose(t.param(p.V));
    Var hidden = t.activation(t.matmul(H, vt), ops::Activation::tanh);
    return t.matmul(hidden, t.param(p.w));
}

inline Var attention_scores_leaky(Tape& t, Var H, LeakyAttentionParams& p) {
    Var h1 = t.activation(t.linear(H, t.param(p.fc1.weight), t.param(p.fc1.bias)),
                          ops::Activation::leaky_relu);
    return t.linear(h1, t.param(p.fc2.weight), t.param(p.fc2.bias));
}

inline Var head_forward(Tape& t, Var x, MlpHead& head) {
    Var cur = x;
    for (std::size_t i = 0; i < head.layers.size(); ++i) {
        cur = t.linear(cur, t.param(head.layers[i].weight), t.param(head.layers[i].bias));
        if (i + 1 < head.layers.size()) cur = t.activation(cur, ops::Activation::tanh);
    }
    return cur;
}

}  // namespace detail

// Records the architecture's forward pass for one bag on the given tape.
// H is n x M with n >= 1.
inline ForwardVars model_forward(Tape& t, const Tensor2D& H, MilModel& m) {
    if (H.rows == 0) throw EmptyBagError("bag has no instances");
    if (H.cols != m.embed_dim) throw ShapeError("bag embedding width != model embed_dim");

    Var h = t.leaf(H);
    ForwardVars out;

    Var scores = (m.arch == Arch::admil) ? detail::attention_scores_leaky(t, h, m.leaky_attn)
                                         : detail::attention_scores_tanh(t, h, m.tanh_attn);
    out.attention = t.softmax(scores);

    if (m.arch == Arch::amil) {
        Var pooled = t.sum_rows(t.scale_rows(h, out.attention));  // 1 x M
        Var logit = detail::head_forward(t, pooled, m.head);      // 1 x 1
        out.bag_prob = t.activation(logit, ops::Activation::sigmoid);
    } else {
        Var weighted = t.scale_rows(h, out.attention);            // a_i * h_i
        Var patch = detail::head_forward(t, weighted, m.head);    // n x 2
        out.class_scores = t.sum_rows(patch);                     // 1 x 2
        Var probs = t.softmax(out.class_scores);
        out.bag_prob = t.pick(probs, 0, 1);
        out.patch_logits_pos = t.pick_col(patch, 1);
    }
    return out;
}

// Pure inference: runs a private tape and extracts plain values.
inline BagOutput model_infer(const Tensor2D& H, MilModel& m) {
    Tape t;
    ForwardVars fv = model_forward(t, H, m);
    BagOutput out;
    out.bag_prob = t.value(fv.bag_prob).at(0, 0);
    out.attention = t.value(fv.attention).values;
    if (fv.patch_logits_pos >= 0) {
        const Tensor2D& pl = t.value(fv.patch_logits_pos);
        out.patch_logits = pl.values;
        std::vector<double> bounded(pl.values.size());
        for (std::size_t i = 0; i < bounded.size(); ++i)
            bounded[i] = ops::apply_activation(pl.values[i], ops::Activation::sigmoid);
        out.bounded_contribs = std::move(bounded);
    }
    return out;
}

// Attention vectors as plain values (spec-level operations).
inline std::vector<double> attention_tanh(const Tensor2D& H, TanhAttentionParams& p) {
    if (H.rows == 0) throw EmptyBagError("bag has no instances");
    Tape t;
    Var a = t.softmax(detail::attention_scores_tanh(t, t.leaf(H), p));
    return t.value(a).values;
}

inline std::vector<double> attention_leaky(const Tensor2D& H, LeakyAttentionParams& p) {
    if (H.rows == 0) throw EmptyBagError("bag has no instances");
    Tape t;
    Var a = t.softmax(detail::attention_scores_leaky(t, t.leaf(H), p));
    return t.value(a).values;
}

// ---- Checkpoint container ------------------------------------------------
// Layout (little-endian): magic "SMCP", u8 version, u8 arch, u32 M, u32 L,
// u32 tensor count, then per tensor u32 rows, u32 cols, rows*cols f64.
// Tensor order is the parameters() order, which is fixed per architecture.

inline constexpr char kCheckpointMagic[4] = {'S', 'M', 'C', 'P'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

inline void save_checkpoint(MilModel& m, const std::string& path) {
    BinWriter w(path);
    w.bytes(kCheckpointMagic, 4);
    w.u8(kCheckpointVersion);
    w.u8(static_cast<std::uint8_t>(m.arch));
    w.u32(static_cast<std::uint32_t>(m.embed_dim));
    w.u32(static_cast<std::uint32_t>(m.attn_dim));
    auto params = m.parameters();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (Param* p : params) {
        w.u32(static_cast<std::uint32_t>(p->value.rows));
        w.u32(static_cast<std::uint32_t>(p->value.cols));
        for (double v : p->value.values) w.f64(v);
    }
    w.finish();
}

inline MilModel load_checkpoint(const std::string& path) {
    BinReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw FormatError("not a checkpoint file: " + path);
    if (r.u8() != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
    const Arch arch = static_cast<Arch>(r.u8());
    const std::size_t M = r.u32();
    const std::size_t L = r.u32();
    const std::uint32_t count = r.u32();

    // Reconstruct shapes by building a skeleton model, then infer the head
    // depth from the remaining tensor count (2 tensors per layer).
    const std::size_t attn_tensors = (arch == Arch::admil) ? 4 : 2;
    if (count < attn_tensors + 2 || (count - attn_tensors) % 2 != 0)
        throw FormatError("checkpoint tensor count inconsistent");
    const std::size_t head_layers = (count - attn_tensors) / 2;

    MilModel m;
    m.arch = arch;
    m.embed_dim = M;
    m.attn_dim = L;

    auto read_tensor = [&r]() {
        const std::size_t rows = r.u32();
        const std::size_t cols = r.u32();
        Tensor2D t(rows, cols);
        for (double& v : t.values) v = r.f64();
        return t;
    };

    if (arch == Arch::amil || arch == Arch::hybrid) {
        m.tanh_attn.V = Param(read_tensor());
        m.tanh_attn.w = Param(read_tensor());
    } else {
        m.leaky_attn.fc1.weight = Param(read_tensor());
        m.leaky_attn.fc1.bias = Param(read_tensor());
        m.leaky_attn.fc2.weight = Param(read_tensor());
        m.leaky_attn.fc2.bias = Param(read_tensor());
    }
    for (std::size_t i = 0; i < head_layers; ++i) {
        Dense d;
        d.weight = Param(read_tensor());
        d.bias = Param(read_tensor());
        m.head.layers.push_back(std::move(d));
    }
    return m;
}

}  // namespace slidemil
