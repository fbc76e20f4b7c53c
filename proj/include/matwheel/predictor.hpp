#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "matwheel/errors.hpp"
#include "matwheel/graph.hpp"
#include "matwheel/nn.hpp"
#include "matwheel/rng.hpp"
#include "matwheel/structure.hpp"

namespace matwheel {

struct PredictorConfig {
    int embed_dim = 32;
    int n_conv = 2;
    int hidden_dim = 32;
    double learning_rate = 0.01;
    int epochs = 200;
    int batch_size = 32;
    int patience = 30;
    std::uint64_t seed = 0;
};

/// One gated convolution: messages over z_ij = [v_i | v_j | edge_ij],
/// v_i <- v_i + sum_j sigmoid(gate(z_ij)) * softplus(core(z_ij)).
struct ConvLayer {
    Linear gate;
    Linear core;
};

/// Graph-convolutional regressor. Predictions are de-standardized with
/// (target_mean, target_std) learned from the training labels.
struct PredictorModel {
    PredictorConfig config;
    NeighborParams neighbor;
    Matrix embedding; // 118 x embed_dim
    std::vector<ConvLayer> convs;
    Linear hidden;  // embed_dim -> hidden_dim, softplus
    Linear readout; // hidden_dim -> 1, affine
    double target_mean = 0.0;
    double target_std = 1.0;
};

struct TrainReport {
    std::vector<double> epoch_losses; // per-epoch training MAE on standardized targets
    double best_val_mae = 0.0;        // original units; training MAE when val is empty
    int best_epoch = -1;              // -1 when no epoch ran
};

constexpr int kNumElements = 118;

/// Deterministic init: embedding, then each conv layer (gate, core), then
/// hidden and readout, all Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from
/// one xoshiro stream seeded with config.seed.
inline PredictorModel init_predictor(const PredictorConfig& config, const NeighborParams& neighbor) {
    if (config.embed_dim < 1 || config.n_conv < 0 || config.hidden_dim < 1 || config.batch_size < 1)
        throw ConfigError("predictor dimensions must be >= 1");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate))
        throw ConfigError("predictor learning_rate must be finite and > 0");

    PredictorModel m;
    m.config = config;
    m.neighbor = neighbor;

    Rng rng(config.seed);
    m.embedding = Matrix(kNumElements, config.embed_dim);
    for (auto& v : m.embedding.data) v = rng.uniform(-0.5, 0.5);

    const int z_dim = 2 * config.embed_dim + neighbor.n_centers;
    m.convs.resize(static_cast<std::size_t>(config.n_conv));
    for (auto& layer : m.convs) {
        layer.gate = Linear(config.embed_dim, z_dim);
        layer.core = Linear(config.embed_dim, z_dim);
        init_uniform(layer.gate, rng);
        init_uniform(layer.core, rng);
    }
    m.hidden = Linear(config.hidden_dim, config.embed_dim);
    init_uniform(m.hidden, rng);
    m.readout = Linear(1, config.hidden_dim);
    init_uniform(m.readout, rng);
    return m;
}

/// Gradient holder with the same tensor layout as the model.
struct PredictorGrads {
    Matrix embedding;
    std::vector<ConvLayer> convs;
    Linear hidden;
    Linear readout;
};

inline PredictorGrads make_grads(const PredictorModel& m) {
    PredictorGrads g;
    g.embedding = Matrix(m.embedding.rows, m.embedding.cols);
    g.convs.resize(m.convs.size());
    for (std::size_t l = 0; l < m.convs.size(); ++l) {
        g.convs[l].gate = Linear(m.convs[l].gate.out_dim(), m.convs[l].gate.in_dim());
        g.convs[l].core = Linear(m.convs[l].core.out_dim(), m.convs[l].core.in_dim());
    }
    g.hidden = Linear(m.hidden.out_dim(), m.hidden.in_dim());
    g.readout = Linear(m.readout.out_dim(), m.readout.in_dim());
    return g;
}

inline void zero_grads(PredictorGrads& g) {
    std::fill(g.embedding.data.begin(), g.embedding.data.end(), 0.0);
    for (auto& layer : g.convs) {
        zero(layer.gate);
        zero(layer.core);
    }
    zero(g.hidden);
    zero(g.readout);
}

/// Named tensor visitor; the order defines the checkpoint layout and the
/// flattened parameter vector used by the finite-difference tests.
template <typename Model, typename F>
void for_each_tensor(Model& m, F&& f) {
    f("embedding", m.embedding.data);
    for (std::size_t l = 0; l < m.convs.size(); ++l) {
        const std::string prefix = "conv" + std::to_string(l);
        f(prefix + ".gate.w", m.convs[l].gate.w.data);
        f(prefix + ".gate.b", m.convs[l].gate.b);
        f(prefix + ".core.w", m.convs[l].core.w.data);
        f(prefix + ".core.b", m.convs[l].core.b);
    }
    f("hidden.w", m.hidden.w.data);
    f("hidden.b", m.hidden.b);
    f("readout.w", m.readout.w.data);
    f("readout.b", m.readout.b);
}

namespace detail {

/// Intermediates captured during a forward pass for exact backprop.
struct PredictorStash {
    std::vector<std::vector<double>> node_states; // n_conv+1 entries, each n*D
    std::vector<std::vector<double>> gate_pre;    // per layer, n_edges*D
    std::vector<std::vector<double>> core_pre;    // per layer, n_edges*D
    std::vector<double> pooled;                   // D
    std::vector<double> hidden_pre;               // H
    std::vector<double> hidden_act;               // H
};

inline double forward_standardized(const PredictorModel& m, const CrystalGraph& g, PredictorStash* stash) {
    const int d = m.config.embed_dim;
    const int n = g.n_nodes;
    if (g.n_centers != m.neighbor.n_centers)
        throw ShapeMismatch("graph edge feature length " + std::to_string(g.n_centers) +
                            " does not match model " + std::to_string(m.neighbor.n_centers));
    if (n < 1) throw ShapeMismatch("graph has no nodes");

    std::vector<double> states(static_cast<std::size_t>(n) * d);
    for (int i = 0; i < n; ++i) {
        const int z = g.node_species[static_cast<std::size_t>(i)];
        if (z < 1 || z > kNumElements) throw ShapeMismatch("atomic number out of embedding range");
        const double* row = m.embedding.row(z - 1);
        std::copy(row, row + d, states.begin() + static_cast<std::ptrdiff_t>(i) * d);
    }
    if (stash) {
        stash->node_states.clear();
        stash->gate_pre.clear();
        stash->core_pre.clear();
        stash->node_states.push_back(states);
    }

    const int z_dim = 2 * d + g.n_centers;
    std::vector<double> z(static_cast<std::size_t>(z_dim));
    std::vector<double> gate_pre(static_cast<std::size_t>(d));
    std::vector<double> core_pre(static_cast<std::size_t>(d));
    for (const auto& layer : m.convs) {
        std::vector<double> next = states;
        std::vector<double> layer_gate, layer_core;
        if (stash) {
            layer_gate.reserve(g.edges.size() * static_cast<std::size_t>(d));
            layer_core.reserve(g.edges.size() * static_cast<std::size_t>(d));
        }
        for (const auto& e : g.edges) {
            const double* vi = states.data() + static_cast<std::ptrdiff_t>(e.src) * d;
            const double* vj = states.data() + static_cast<std::ptrdiff_t>(e.dst) * d;
            std::copy(vi, vi + d, z.begin());
            std::copy(vj, vj + d, z.begin() + d);
            std::copy(e.feature.begin(), e.feature.end(), z.begin() + 2 * d);
            affine(layer.gate.w, layer.gate.b, z.data(), gate_pre.data());
            affine(layer.core.w, layer.core.b, z.data(), core_pre.data());
            double* out = next.data() + static_cast<std::ptrdiff_t>(e.src) * d;
            for (int k = 0; k < d; ++k) out[k] += sigmoid(gate_pre[static_cast<std::size_t>(k)]) *
                                                  softplus(core_pre[static_cast<std::size_t>(k)]);
            if (stash) {
                layer_gate.insert(layer_gate.end(), gate_pre.begin(), gate_pre.end());
                layer_core.insert(layer_core.end(), core_pre.begin(), core_pre.end());
            }
        }
        states = std::move(next);
        if (stash) {
            stash->node_states.push_back(states);
            stash->gate_pre.push_back(std::move(layer_gate));
            stash->core_pre.push_back(std::move(layer_core));
        }
    }

    std::vector<double> pooled(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i) {
        const double* vi = states.data() + static_cast<std::ptrdiff_t>(i) * d;
        for (int k = 0; k < d; ++k) pooled[static_cast<std::size_t>(k)] += vi[k];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : pooled) v *= inv_n;

    std::vector<double> hidden_pre(static_cast<std::size_t>(m.config.hidden_dim));
    affine(m.hidden.w, m.hidden.b, pooled.data(), hidden_pre.data());
    std::vector<double> hidden_act(hidden_pre.size());
    for (std::size_t k = 0; k < hidden_pre.size(); ++k) hidden_act[k] = softplus(hidden_pre[k]);

    double y = 0.0;
    affine(m.readout.w, m.readout.b, hidden_act.data(), &y);

    if (stash) {
        stash->pooled = std::move(pooled);
        stash->hidden_pre = std::move(hidden_pre);
        stash->hidden_act = std::move(hidden_act);
    }
    return y;
}

/// Exact reverse pass for d(loss)/d(params) given d(loss)/d(y_std).
inline void backward(const PredictorModel& m, const CrystalGraph& g, const PredictorStash& stash,
                     double d_y, PredictorGrads& grads) {
    const int d = m.config.embed_dim;
    const int h = m.config.hidden_dim;
    const int n = g.n_nodes;

    // readout
    std::vector<double> d_hidden_act(static_cast<std::size_t>(h), 0.0);
    add_outer(grads.readout.w, grads.readout.b, &d_y, stash.hidden_act.data());
    add_transposed_matvec(m.readout.w, &d_y, d_hidden_act.data());

    std::vector<double> d_hidden_pre(static_cast<std::size_t>(h));
    for (int k = 0; k < h; ++k)
        d_hidden_pre[static_cast<std::size_t>(k)] =
            d_hidden_act[static_cast<std::size_t>(k)] * sigmoid(stash.hidden_pre[static_cast<std::size_t>(k)]);

    std::vector<double> d_pooled(static_cast<std::size_t>(d), 0.0);
    add_outer(grads.hidden.w, grads.hidden.b, d_hidden_pre.data(), stash.pooled.data());
    add_transposed_matvec(m.hidden.w, d_hidden_pre.data(), d_pooled.data());

    // mean pool
    std::vector<double> d_states(static_cast<std::size_t>(n) * d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k)
            d_states[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(k)] =
                d_pooled[static_cast<std::size_t>(k)] * inv_n;

    // conv layers, last to first
    const int z_dim = 2 * d + g.n_centers;
    std::vector<double> z(static_cast<std::size_t>(z_dim));
    std::vector<double> dz(static_cast<std::size_t>(z_dim));
    std::vector<double> da(static_cast<std::size_t>(d));
    std::vector<double> db(static_cast<std::size_t>(d));
    for (int l = static_cast<int>(m.convs.size()) - 1; l >= 0; --l) {
        const auto& layer = m.convs[static_cast<std::size_t>(l)];
        auto& layer_grads = grads.convs[static_cast<std::size_t>(l)];
        const auto& v_in = stash.node_states[static_cast<std::size_t>(l)];
        const auto& gate_pre = stash.gate_pre[static_cast<std::size_t>(l)];
        const auto& core_pre = stash.core_pre[static_cast<std::size_t>(l)];

        std::vector<double> d_prev = d_states; // residual path
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const auto& edge = g.edges[e];
            const double* d_msg = d_states.data() + static_cast<std::ptrdiff_t>(edge.src) * d;
            const double* a = gate_pre.data() + e * static_cast<std::size_t>(d);
            const double* b = core_pre.data() + e * static_cast<std::size_t>(d);
            bool live = false;
            for (int k = 0; k < d; ++k) {
                const double sa = sigmoid(a[k]);
                const double sp = softplus(b[k]);
                da[static_cast<std::size_t>(k)] = d_msg[k] * sa * (1.0 - sa) * sp;
                db[static_cast<std::size_t>(k)] = d_msg[k] * sa * sigmoid(b[k]);
                live = live || d_msg[k] != 0.0;
            }
            if (!live) continue;

            const double* vi = v_in.data() + static_cast<std::ptrdiff_t>(edge.src) * d;
            const double* vj = v_in.data() + static_cast<std::ptrdiff_t>(edge.dst) * d;
            std::copy(vi, vi + d, z.begin());
            std::copy(vj, vj + d, z.begin() + d);
            std::copy(edge.feature.begin(), edge.feature.end(), z.begin() + 2 * d);

            add_outer(layer_grads.gate.w, layer_grads.gate.b, da.data(), z.data());
            add_outer(layer_grads.core.w, layer_grads.core.b, db.data(), z.data());

            std::fill(dz.begin(), dz.end(), 0.0);
            add_transposed_matvec(layer.gate.w, da.data(), dz.data());
            add_transposed_matvec(layer.core.w, db.data(), dz.data());
            double* d_vi = d_prev.data() + static_cast<std::ptrdiff_t>(edge.src) * d;
            double* d_vj = d_prev.data() + static_cast<std::ptrdiff_t>(edge.dst) * d;
            for (int k = 0; k < d; ++k) {
                d_vi[k] += dz[static_cast<std::size_t>(k)];
                d_vj[k] += dz[static_cast<std::size_t>(k) + static_cast<std::size_t>(d)];
            }
        }
        d_states = std::move(d_prev);
    }

    for (int i = 0; i < n; ++i) {
        const int zi = g.node_species[static_cast<std::size_t>(i)];
        double* row = grads.embedding.row(zi - 1);
        const double* d_vi = d_states.data() + static_cast<std::ptrdiff_t>(i) * d;
        for (int k = 0; k < d; ++k) row[k] += d_vi[k];
    }
}

inline void apply_sgd(PredictorModel& m, const PredictorGrads& g, double lr) {
    for (std::size_t i = 0; i < m.embedding.data.size(); ++i) m.embedding.data[i] -= lr * g.embedding.data[i];
    for (std::size_t l = 0; l < m.convs.size(); ++l) {
        sgd_step(m.convs[l].gate, g.convs[l].gate, lr);
        sgd_step(m.convs[l].core, g.convs[l].core, lr);
    }
    sgd_step(m.hidden, g.hidden, lr);
    sgd_step(m.readout, g.readout, lr);
}

} // namespace detail

/// Predicted property in dataset units.
inline double forward(const PredictorModel& m, const CrystalGraph& g) {
    return detail::forward_standardized(m, g, nullptr) * m.target_std + m.target_mean;
}

/// MAE on standardized targets over pre-built graphs; exposed for the
/// finite-difference gradient tests.
inline double predictor_batch_loss(const PredictorModel& m, const std::vector<CrystalGraph>& graphs,
                                   const std::vector<double>& targets_std) {
    double acc = 0.0;
    for (std::size_t i = 0; i < graphs.size(); ++i)
        acc += std::abs(detail::forward_standardized(m, graphs[i], nullptr) - targets_std[i]);
    return acc / static_cast<double>(graphs.size());
}

/// Gradient of predictor_batch_loss; returns the loss value.
inline double predictor_batch_loss_grad(const PredictorModel& m, const std::vector<CrystalGraph>& graphs,
                                        const std::vector<double>& targets_std, PredictorGrads& grads) {
    double acc = 0.0;
    detail::PredictorStash stash;
    const double inv_b = 1.0 / static_cast<double>(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const double y = detail::forward_standardized(m, graphs[i], &stash);
        const double err = y - targets_std[i];
        acc += std::abs(err);
        const double d_y = (err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0)) * inv_b;
        detail::backward(m, graphs[i], stash, d_y, grads);
    }
    return acc * inv_b;
}

/// Minibatch gradient descent on standardized-target MAE with optional
/// early stopping on validation MAE (patience epochs, ties keep the
/// earlier epoch). Deterministic given config.seed.
inline std::pair<PredictorModel, TrainReport> train_predictor(PredictorModel model,
                                                              const std::vector<PropertyRecord>& train,
                                                              const std::vector<PropertyRecord>& val,
                                                              const PredictorConfig& config) {
    if (train.empty()) throw EmptyTrainingSet("train_predictor: no training records");

    std::vector<CrystalGraph> train_graphs;
    train_graphs.reserve(train.size());
    for (const auto& r : train) train_graphs.push_back(build_graph(r.structure, model.neighbor));
    std::vector<CrystalGraph> val_graphs;
    val_graphs.reserve(val.size());
    for (const auto& r : val) val_graphs.push_back(build_graph(r.structure, model.neighbor));

    // standardization constants from the training labels only
    double mean = 0.0;
    for (const auto& r : train) mean += r.property;
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const auto& r : train) var += (r.property - mean) * (r.property - mean);
    double sd = std::sqrt(var / static_cast<double>(train.size()));
    if (!(sd > 1e-12)) sd = 1.0;
    model.target_mean = mean;
    model.target_std = sd;

    std::vector<double> targets_std(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) targets_std[i] = (train[i].property - mean) / sd;

    const auto val_mae = [&](const PredictorModel& m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < val.size(); ++i)
            acc += std::abs(detail::forward_standardized(m, val_graphs[i], nullptr) * m.target_std +
                            m.target_mean - val[i].property);
        return acc / static_cast<double>(val.size());
    };

    TrainReport report;
    PredictorModel best = model;
    double best_val = std::numeric_limits<double>::infinity();

    Rng rng(hash_combine(config.seed, 0x747261696eULL)); // training stream, separate from init
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    PredictorGrads grads = detail::make_grads(model);
    detail::PredictorStash stash;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_abs_err = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const double inv_b = 1.0 / static_cast<double>(stop - start);
            detail::zero_grads(grads);
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = order[k];
                const double y = detail::forward_standardized(model, train_graphs[i], &stash);
                const double err = y - targets_std[i];
                epoch_abs_err += std::abs(err);
                const double d_y = (err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0)) * inv_b;
                detail::backward(model, train_graphs[i], stash, d_y, grads);
            }
            detail::apply_sgd(model, grads, config.learning_rate);
        }
        report.epoch_losses.push_back(epoch_abs_err / static_cast<double>(train.size()));

        if (!val.empty()) {
            const double v = val_mae(model);
            if (v < best_val) {
                best_val = v;
                best = model;
                report.best_epoch = epoch;
            }
            if (epoch - report.best_epoch >= config.patience) break;
        } else {
            best = model;
            report.best_epoch = epoch;
        }
    }

    if (!val.empty() && std::isfinite(best_val)) {
        model = std::move(best);
        report.best_val_mae = best_val;
    } else {
        // no validation set: report the final training MAE in original units
        double acc = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i)
            acc += std::abs(detail::forward_standardized(model, train_graphs[i], nullptr) - targets_std[i]);
        report.best_val_mae = acc / static_cast<double>(train.size()) * model.target_std;
    }
    return {std::move(model), std::move(report)};
}

/// Elementwise forward over structures; order-preserving.
inline std::vector<double> predict(const PredictorModel& m, const std::vector<CrystalStructure>& structures) {
    std::vector<double> out;
    out.reserve(structures.size());
    for (const auto& s : structures) out.push_back(forward(m, build_graph(s, m.neighbor)));
    return out;
}

/// One pseudo-labeled record per structure.
inline std::vector<PropertyRecord> pseudo_label(const PredictorModel& m,
                                                const std::vector<CrystalStructure>& structures) {
    const std::vector<double> labels = predict(m, structures);
    std::vector<PropertyRecord> out;
    out.reserve(structures.size());
    for (std::size_t i = 0; i < structures.size(); ++i)
        out.push_back({structures[i], labels[i], LabelKind::Pseudo});
    return out;
}

} // namespace matwheel
