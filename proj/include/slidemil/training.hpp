#pragma once

#include <vector>

#include "slidemil/bags.hpp"
#include "slidemil/metrics.hpp"
#include "slidemil/models.hpp"
#include "slidemil/optim.hpp"

namespace slidemil {

struct TrainConfig {
    std::size_t embed_dim = 1024;  // M
    std::size_t attn_dim = 128;    // L
    double lr0 = 1e-4;
    double lr_min = 1e-6;
    std::size_t epochs = 50;
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    std::vector<std::size_t> hidden_head = {};
};

struct TrainedModel {
    MilModel model;
    std::vector<double> epoch_losses;  // mean BCE per epoch
};

// One bag per optimization step: forward, BCE, backward, Adam. Learning rate
// follows cosine annealing across epochs. Bag order reshuffles every epoch.
inline TrainedModel train_single(const std::vector<Bag>& train_bags, Arch arch,
                                 const TrainConfig& cfg, std::uint64_t seed) {
    if (train_bags.empty()) throw DataError("no training bags");
    detail::check_two_classes(train_bags, "train");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");

    TrainedModel out;
    out.model = make_model(arch, cfg.embed_dim, cfg.attn_dim, seed, cfg.hidden_head);
    auto params = out.model.parameters();
    Rng rng(mix_seed(seed, 0x7261696eull));

    std::vector<std::size_t> order(train_bags.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cosine_anneal(cfg.lr0, cfg.lr_min, epoch, cfg.epochs);
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t idx : order) {
            const Bag& bag = train_bags[idx];
            Tape tape;
            ForwardVars fv = model_forward(tape, bag.instances, out.model);
            Var loss = tape.bce(fv.bag_prob, bag.label);
            loss_sum += tape.value(loss).at(0, 0);
            out.model.zero_grads();
            tape.backward(loss);
            adam_step(params, lr);
        }
        out.epoch_losses.push_back(loss_sum / static_cast<double>(train_bags.size()));
    }
    return out;
}

inline std::vector<double> score_bags(const std::vector<Bag>& bags, MilModel& model) {
    std::vector<double> scores;
    scores.reserve(bags.size());
    for (const Bag& b : bags) scores.push_back(model_infer(b.instances, model).bag_prob);
    return scores;
}

inline std::vector<int> bag_labels(const std::vector<Bag>& bags) {
    std::vector<int> labels;
    labels.reserve(bags.size());
    for (const Bag& b : bags) labels.push_back(b.label);
    return labels;
}

struct FoldResult {
    TrainedModel trained;
    double val_auc = 0.0;
};

struct CvResult {
    std::vector<FoldResult> folds;
    std::size_t best_fold = 0;
};

// k-fold cross-validation on the train set: each fold trains on the other
// folds and is scored on its own held-out bags.
inline CvResult train_model(const std::vector<Bag>& train_bags, Arch arch,
                            const TrainConfig& cfg) {
    auto folds = kfold(train_bags, cfg.folds, mix_seed(cfg.seed, 0x666f6c64ull));
    CvResult out;
    out.folds.resize(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<char> held(train_bags.size(), 0);
        for (std::size_t i : folds[f]) held[i] = 1;
        std::vector<Bag> fit, val;
        for (std::size_t i = 0; i < train_bags.size(); ++i)
            (held[i] ? val : fit).push_back(train_bags[i]);
        FoldResult fr;
        fr.trained = train_single(fit, arch, cfg, mix_seed(cfg.seed, f));
        auto scores = score_bags(val, fr.trained.model);
        fr.val_auc = roc_auc(scores, bag_labels(val)).auc;
        out.folds[f] = std::move(fr);
    }
    std::vector<double> val_aucs;
    for (const FoldResult& fr : out.folds) val_aucs.push_back(fr.val_auc);
    out.best_fold = select_best_fold(val_aucs);
    return out;
}

}  // namespace slidemil
