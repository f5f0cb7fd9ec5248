#include <catch2/catch_amalgamated.hpp>

#include "slidemil/training.hpp"

using namespace slidemil;

namespace {

std::vector<Bag> easy_bags(std::size_t count, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.num_bags = count;
    cfg.n_min = 4;
    cfg.n_max = 10;
    cfg.dim = 8;
    cfg.class_separation = 3.0;
    cfg.positive_instance_rate = 0.4;
    cfg.seed = seed;
    return generate_synthetic(cfg);
}

}  // namespace

TEST_CASE("training reduces the loss on a separable task") {
    auto bags = easy_bags(30, 5);
    TrainConfig cfg;
    cfg.embed_dim = 8;
    cfg.attn_dim = 4;
    cfg.lr0 = 3e-3;
    cfg.lr_min = 1e-5;
    cfg.epochs = 20;
    cfg.seed = 1;
    for (Arch arch : {Arch::amil, Arch::admil, Arch::hybrid}) {
        TrainedModel tm = train_single(bags, arch, cfg, 7);
        REQUIRE(tm.epoch_losses.size() == 20);
        CHECK(tm.epoch_losses.back() < tm.epoch_losses.front());
    }
}

TEST_CASE("training is deterministic under a fixed seed") {
    auto bags = easy_bags(16, 9);
    TrainConfig cfg;
    cfg.embed_dim = 8;
    cfg.attn_dim = 4;
    cfg.lr0 = 1e-3;
    cfg.epochs = 3;
    TrainedModel a = train_single(bags, Arch::amil, cfg, 11);
    TrainedModel b = train_single(bags, Arch::amil, cfg, 11);
    CHECK(a.epoch_losses == b.epoch_losses);
    auto pa = a.model.parameters();
    auto pb = b.model.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

TEST_CASE("training rejects single-class datasets") {
    auto bags = easy_bags(10, 13);
    for (Bag& b : bags) b.label = 0;
    TrainConfig cfg;
    cfg.embed_dim = 8;
    cfg.attn_dim = 4;
    CHECK_THROWS_AS(train_single(bags, Arch::amil, cfg, 1), DataError);
}

TEST_CASE("cross-validation returns one model and AUC per fold") {
    auto bags = easy_bags(30, 17);
    TrainConfig cfg;
    cfg.embed_dim = 8;
    cfg.attn_dim = 4;
    cfg.lr0 = 3e-3;
    cfg.epochs = 8;
    cfg.folds = 3;
    cfg.seed = 19;
    CvResult cv = train_model(bags, Arch::hybrid, cfg);
    REQUIRE(cv.folds.size() == 3);
    for (const FoldResult& fr : cv.folds) {
        CHECK(fr.val_auc >= 0.0);
        CHECK(fr.val_auc <= 1.0);
    }
    CHECK(cv.best_fold < 3);
    double best = cv.folds[cv.best_fold].val_auc;
    for (const FoldResult& fr : cv.folds) CHECK(best >= fr.val_auc);
}
