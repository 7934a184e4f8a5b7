// Copyright 2026 The apsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "apsel/dataset.hpp"
#include "apsel/error.hpp"
#include "apsel/parallel.hpp"
#include "apsel/rng.hpp"
#include "apsel/selection.hpp"

namespace apsel {

enum class ClassifierKind { knn, forest };

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::knn;
    std::size_t k_neighbors = 3;
    std::size_t trees = 100;
    /// 0 means unlimited depth.
    std::size_t max_depth = 0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        if (k_neighbors < 1) throw ConfigError("knn needs k >= 1");
        if (trees < 1) throw ConfigError("forest needs at least one tree");
    }
};

inline std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::knn ? "knn" : "forest"; }

inline ClassifierKind parse_classifier_kind(const std::string& s) {
    if (s == "knn") return ClassifierKind::knn;
    if (s == "forest") return ClassifierKind::forest;
    throw ConfigError("unknown classifier '" + s + "'");
}

/// k nearest neighbours under Euclidean distance. Distance ties go to the
/// lower training row; vote ties go to the label whose first supporting
/// neighbour is closest.
class KnnClassifier {
  public:
    KnnClassifier(const FingerprintDataset& train, std::size_t k)
        : features_(train.substituted_matrix()), labels_(train.floors()), k_(std::min(k, train.samples())) {}

    FloorLabel predict(std::span<const double> query) const {
        const std::size_t m = features_.rows();
        std::vector<std::pair<double, std::size_t>> dist(m);
        for (std::size_t r = 0; r < m; ++r) {
            const auto row = features_.row(r);
            double d = 0.0;
            for (std::size_t c = 0; c < row.size(); ++c) {
                const double diff = row[c] - query[c];
                d += diff * diff;
            }
            dist[r] = {d, r};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
        std::vector<std::pair<FloorLabel, std::size_t>> votes;  // label, count; in neighbour order
        for (std::size_t i = 0; i < k_; ++i) {
            const auto label = labels_[dist[i].second];
            auto it = std::find_if(votes.begin(), votes.end(), [&](const auto& v) { return v.first == label; });
            if (it == votes.end())
                votes.emplace_back(label, 1);
            else
                ++it->second;
        }
        auto best = votes.begin();
        for (auto it = votes.begin(); it != votes.end(); ++it)
            if (it->second > best->second) best = it;
        return best->first;
    }

    std::size_t feature_count() const noexcept { return features_.cols(); }

  private:
    Matrix<double> features_;
    std::vector<FloorLabel> labels_;
    std::size_t k_;
};

/// Bagged CART trees (Gini impurity, sqrt(features) candidates per split,
/// bootstrap rows per tree). Tree t is grown from the stream seed + t.
class RandomForest {
  public:
    RandomForest(const FingerprintDataset& train, const ClassifierSpec& spec)
        : labels_(train.floor_labels()), trees_(spec.trees) {
        const auto x = train.substituted_matrix();
        std::vector<int> y(train.samples());
        for (std::size_t r = 0; r < y.size(); ++r)
            y[r] = static_cast<int>(std::lower_bound(labels_.begin(), labels_.end(), train.floors()[r]) - labels_.begin());
        const auto features = x.cols();
        const auto mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features))));
        parallel_for(spec.trees, spec.threads, [&](std::size_t t) {
            Rng rng(spec.seed + t);
            std::vector<std::size_t> rows(x.rows());
            for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(x.rows()));
            Grower grower{x, y, labels_.size(), mtry, spec.max_depth, rng, trees_[t]};
            grower.grow(rows, 0);
        });
    }

    FloorLabel predict(std::span<const double> query) const {
        std::vector<std::size_t> votes(labels_.size(), 0);
        for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(query))];
        const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
        return labels_[static_cast<std::size_t>(best)];
    }

  private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
    };

    struct Tree {
        std::vector<Node> nodes;

        int predict(std::span<const double> q) const {
            std::size_t i = 0;
            while (nodes[i].feature >= 0)
                i = static_cast<std::size_t>(q[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
            return nodes[i].label;
        }
    };

    struct Grower {
        const Matrix<double>& x;
        const std::vector<int>& y;
        std::size_t classes;
        std::size_t mtry;
        std::size_t max_depth;
        Rng& rng;
        Tree& tree;

        static double gini(const std::vector<std::size_t>& counts, std::size_t total) {
            if (total == 0) return 0.0;
            double s = 0.0;
            for (auto c : counts) {
                const double p = static_cast<double>(c) / static_cast<double>(total);
                s += p * p;
            }
            return 1.0 - s;
        }

        int grow(std::vector<std::size_t>& rows, std::size_t depth) {
            const int id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            std::vector<std::size_t> counts(classes, 0);
            for (auto r : rows) ++counts[static_cast<std::size_t>(y[r])];
            tree.nodes[static_cast<std::size_t>(id)].label =
                static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
            if (pure || rows.size() < 2 || (max_depth != 0 && depth >= max_depth)) return id;

            // Sample mtry distinct candidate features (partial Fisher-Yates).
            std::vector<std::size_t> features(x.cols());
            std::iota(features.begin(), features.end(), std::size_t{0});
            const auto draw = std::min(mtry, features.size());
            for (std::size_t i = 0; i < draw; ++i)
                std::swap(features[i], features[i + static_cast<std::size_t>(rng.uniform_index(features.size() - i))]);

            double best_score = gini(counts, rows.size());
            int best_feature = -1;
            double best_threshold = 0.0;
            std::vector<std::pair<double, int>> column(rows.size());
            for (std::size_t fi = 0; fi < draw; ++fi) {
                const auto f = features[fi];
                for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x(rows[i], f), y[rows[i]]};
                std::sort(column.begin(), column.end());
                std::vector<std::size_t> left(classes, 0);
                std::vector<std::size_t> right = counts;
                for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                    ++left[static_cast<std::size_t>(column[i].second)];
                    --right[static_cast<std::size_t>(column[i].second)];
                    if (column[i].first == column[i + 1].first) continue;
                    const auto nl = i + 1;
                    const auto nr = column.size() - nl;
                    const double score = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                                         static_cast<double>(column.size());
                    if (score < best_score - 1e-12) {
                        best_score = score;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (column[i].first + column[i + 1].first);
                    }
                }
            }
            if (best_feature < 0) return id;

            std::vector<std::size_t> left_rows, right_rows;
            for (auto r : rows)
                (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(r);
            rows.clear();
            rows.shrink_to_fit();
            const int l = grow(left_rows, depth + 1);
            const int r = grow(right_rows, depth + 1);
            auto& node = tree.nodes[static_cast<std::size_t>(id)];
            node.feature = best_feature;
            node.threshold = best_threshold;
            node.left = l;
            node.right = r;
            return id;
        }
    };

    std::vector<FloorLabel> labels_;
    std::vector<Tree> trees_;
};

/// A trained floor classifier bound to the AP columns it was trained on.
class Classifier {
  public:
    Classifier(const ClassifierSpec& spec, const FingerprintDataset& train)
        : ap_ids_(train.ap_ids()), threads_(spec.threads), model_(fit(spec, train)) {}

    FloorLabel predict(std::span<const double> query) const {
        return std::visit([&](const auto& m) { return m.predict(query); }, model_);
    }

    const std::vector<std::string>& ap_ids() const noexcept { return ap_ids_; }
    std::size_t threads() const noexcept { return threads_; }

  private:
    using Model = std::variant<KnnClassifier, RandomForest>;

    static Model fit(const ClassifierSpec& spec, const FingerprintDataset& train) {
        spec.validate();
        if (train.samples() == 0) throw LocalizerError("empty training set");
        if (spec.kind == ClassifierKind::knn) return KnnClassifier(train, spec.k_neighbors);
        return RandomForest(train, spec);
    }

    std::vector<std::string> ap_ids_;
    std::size_t threads_;
    Model model_;
};

/// Fails with LocalizerError when the training set has a single floor;
/// FingerprintDataset already guarantees two.
inline Classifier train(const ClassifierSpec& spec, const FingerprintDataset& train_set) {
    if (train_set.floor_count() < 2) throw LocalizerError("training set has a single floor");
    return Classifier(spec, train_set);
}

struct AccuracyReport {
    double accuracy = 0.0;
    /// Floor labels indexing `per_floor` and the confusion matrix.
    std::vector<FloorLabel> labels;
    /// Recall per true floor; NaN-free: floors absent from the test set get 0.
    std::vector<double> per_floor;
    /// confusion(true, predicted).
    Matrix<std::size_t> confusion;
    std::size_t n_aps_used = 0;
};

inline AccuracyReport evaluate(const Classifier& clf, const FingerprintDataset& test) {
    if (test.ap_ids() != clf.ap_ids())
        throw LocalizerError("test columns do not match the classifier's training columns");
    const auto m = test.samples();
    const auto features = test.substituted_matrix();
    std::vector<FloorLabel> predicted(m);
    parallel_for(m, clf.threads(), [&](std::size_t r) { predicted[r] = clf.predict(features.row(r)); });

    AccuracyReport report;
    std::vector<FloorLabel> labels = test.floor_labels();
    labels.insert(labels.end(), predicted.begin(), predicted.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    auto index = [&](FloorLabel l) {
        return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) - labels.begin());
    };
    report.confusion = Matrix<std::size_t>(labels.size(), labels.size(), 0);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < m; ++r) {
        ++report.confusion(index(test.floors()[r]), index(predicted[r]));
        correct += predicted[r] == test.floors()[r];
    }
    report.accuracy = m == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(m);
    report.per_floor.assign(labels.size(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t total = 0;
        for (std::size_t j = 0; j < labels.size(); ++j) total += report.confusion(i, j);
        if (total) report.per_floor[i] = static_cast<double>(report.confusion(i, i)) / static_cast<double>(total);
    }
    report.labels = std::move(labels);
    report.n_aps_used = test.aps();
    return report;
}

/// reduce -> train -> evaluate.
inline AccuracyReport evaluate_selection(std::span<const std::uint8_t> x, const FingerprintDataset& train_set,
                                         const FingerprintDataset& test_set, const ClassifierSpec& spec) {
    require_binary<LocalizerError>(x, train_set.aps());
    if (cardinality(x) == 0) throw LocalizerError("cannot localize with an empty AP selection");
    const auto reduced_train = reduce(train_set, x);
    const auto reduced_test = reduce(test_set, x);
    return evaluate(train(spec, reduced_train), reduced_test);
}

inline double accuracy_for_selection(std::span<const std::uint8_t> x, const FingerprintDataset& train_set,
                                     const FingerprintDataset& test_set, const ClassifierSpec& spec) {
    return evaluate_selection(x, train_set, test_set, spec).accuracy;
}

}  // namespace apsel
