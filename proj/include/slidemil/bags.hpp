#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "slidemil/common.hpp"
#include "slidemil/rng.hpp"
#include "slidemil/tensor.hpp"

namespace slidemil {

// One MIL bag: a set of instance embeddings sharing a single binary label.
// instance_labels is hidden ground truth, carried only by synthetic data.
struct Bag {
    Tensor2D instances;  // n x M
    int label = 0;
    std::optional<std::vector<int>> instance_labels;
    std::string source_id;
    std::optional<std::vector<TileCoord>> tile_coords;

    std::size_t size() const { return instances.rows; }
};

// Y = 0 iff every instance label is 0, else 1.
inline int bag_label_oracle(const std::vector<int>& instance_labels) {
    if (instance_labels.empty()) throw EmptyBagError("bag has no instances");
    for (int y : instance_labels)
        if (y != 0) return 1;
    return 0;
}

struct SyntheticConfig {
    std::size_t num_bags = 200;
    std::size_t n_min = 20;
    std::size_t n_max = 100;
    std::size_t dim = 32;
    double positive_instance_rate = 0.2;
    double class_separation = 2.0;
    std::uint64_t seed = 1;
    double label_noise = 0.0;  // fraction of bag labels flipped after generation
};

// Gaussian instance clouds: negatives at the origin, positives shifted by
// class_separation along one fixed random unit direction. Positive bags get
// a binomial number of positive instances, resampled to be at least one.
inline std::vector<Bag> generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.num_bags < 2) throw ConfigError("need at least 2 bags");
    if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) throw ConfigError("bad bag size range");
    if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
    if (cfg.positive_instance_rate <= 0.0 || cfg.positive_instance_rate > 1.0)
        throw ConfigError("positive_instance_rate must be in (0,1]");
    if (cfg.class_separation < 0.0) throw ConfigError("class_separation must be >= 0");
    if (cfg.label_noise < 0.0 || cfg.label_noise > 1.0)
        throw ConfigError("label_noise must be in [0,1]");

    Rng rng(cfg.seed);

    std::vector<double> direction(cfg.dim);
    double norm = 0.0;
    for (double& v : direction) {
        v = rng.gaussian();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : direction) v /= norm;

    std::vector<Bag> bags;
    bags.reserve(cfg.num_bags);
    for (std::size_t b = 0; b < cfg.num_bags; ++b) {
        const bool positive_bag = (b % 2 == 1);  // balanced classes
        const std::size_t n = cfg.n_min + static_cast<std::size_t>(
                                              rng.below(cfg.n_max - cfg.n_min + 1));
        std::vector<int> inst_labels(n, 0);
        if (positive_bag) {
            std::size_t positives = 0;
            do {
                positives = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    inst_labels[i] = rng.uniform() < cfg.positive_instance_rate ? 1 : 0;
                    positives += static_cast<std::size_t>(inst_labels[i]);
                }
            } while (positives == 0);
        }
        Bag bag;
        bag.instances = Tensor2D(n, cfg.dim);
        for (std::size_t i = 0; i < n; ++i) {
            const double shift = inst_labels[i] ? cfg.class_separation : 0.0;
            for (std::size_t j = 0; j < cfg.dim; ++j)
                bag.instances.at(i, j) = rng.gaussian() + shift * direction[j];
        }
        bag.label = bag_label_oracle(inst_labels);
        bag.instance_labels = std::move(inst_labels);
        bag.source_id = "synth" + std::to_string(b);
        bags.push_back(std::move(bag));
    }

    if (cfg.label_noise > 0.0) {
        for (Bag& bag : bags)
            if (rng.uniform() < cfg.label_noise) bag.label = 1 - bag.label;
    }
    return bags;
}

struct DatasetSplit {
    std::vector<Bag> train;
    std::vector<Bag> test;
    std::vector<std::vector<std::size_t>> folds;  // index sets over train
};

namespace detail {

inline void check_two_classes(const std::vector<Bag>& bags, const char* what) {
    bool has0 = false, has1 = false;
    for (const Bag& b : bags) (b.label ? has1 : has0) = true;
    if (!has0 || !has1) throw DataError(std::string(what) + ": needs both classes present");
}

}  // namespace detail

// Stratified shuffled split; both classes appear on each side.
inline DatasetSplit split_train_test(const std::vector<Bag>& bags, double test_frac,
                                     std::uint64_t seed) {
    if (bags.size() < 5) throw DataError("need at least 5 bags to split");
    if (test_frac <= 0.0 || test_frac >= 1.0) throw ConfigError("test_frac must be in (0,1)");
    detail::check_two_classes(bags, "split_train_test");

    Rng rng(seed);
    DatasetSplit out;
    for (int cls : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < bags.size(); ++i)
            if (bags[i].label == cls) idx.push_back(i);
        rng.shuffle(idx);
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_frac * static_cast<double>(idx.size())));
        // Keep both classes represented on both sides.
        n_test = std::max<std::size_t>(1, std::min(n_test, idx.size() - 1));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_test ? out.test : out.train).push_back(bags[idx[i]]);
    }
    return out;
}

// Stratified k folds over the train set. A single round-robin cursor runs
// across both classes, so fold sizes differ by at most one with the larger
// folds first, and per-class counts differ by at most one across folds.
inline std::vector<std::vector<std::size_t>> kfold(const std::vector<Bag>& train, std::size_t k,
                                                   std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be >= 2");
    if (k > train.size()) throw ConfigError("kfold: k exceeds number of bags");
    detail::check_two_classes(train, "kfold");

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t cursor = 0;
    for (int cls : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train[i].label == cls) idx.push_back(i);
        rng.shuffle(idx);
        for (std::size_t i : idx) {
            folds[cursor % k].push_back(i);
            ++cursor;
        }
    }
    return folds;
}

// ---- Dataset manifest ------------------------------------------------------
// CSV, one bag per row: source_id,label,store_path

struct ManifestRow {
    std::string source_id;
    int label = 0;
    std::string store_path;
};

inline void write_dataset_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << "source_id,label,store_path\n";
    for (const ManifestRow& r : rows)
        out << r.source_id << ',' << r.label << ',' << r.store_path << '\n';
    if (!out) throw IoError("manifest write failed: " + path);
}

inline std::vector<ManifestRow> read_dataset_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read manifest: " + path);
    std::vector<ManifestRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("source_id,", 0) == 0) continue;  // header
        }
        std::istringstream ss(line);
        ManifestRow r;
        std::string label;
        if (!std::getline(ss, r.source_id, ',') || !std::getline(ss, label, ',') ||
            !std::getline(ss, r.store_path))
            throw FormatError("bad manifest row: " + line);
        r.label = std::stoi(label);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace slidemil
