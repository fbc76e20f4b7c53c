#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "matwheel/errors.hpp"
#include "matwheel/rng.hpp"
#include "matwheel/structure.hpp"

namespace matwheel {

/// Disjoint train/val/test id sets covering the whole dataset.
struct SplitAssignment {
    std::vector<std::string> train_ids;
    std::vector<std::string> val_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
};

/// Shuffles record ids with xoshiro256** (integer-only, byte-identical
/// across platforms) and cuts (floor(r0*N), floor(r1*N), remainder).
inline SplitAssignment split_dataset(const std::vector<PropertyRecord>& records,
                                     const std::array<double, 3>& ratios, std::uint64_t seed) {
    if (records.empty()) throw EmptyDataset("split_dataset: no records");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1");

    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.structure.id);

    Rng rng(seed);
    shuffle(ids, rng);

    const auto n = records.size();
    const auto n_train = static_cast<std::size_t>(std::floor(ratios[0] * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n)));

    SplitAssignment out;
    out.seed = seed;
    out.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                       ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
    return out;
}

/// Carves the labeled subset out of the train ids: |labeled| =
/// max(1, floor(fraction * |train|)). Returns (labeled, unlabeled).
inline std::pair<std::vector<std::string>, std::vector<std::string>>
subsample_labeled(const std::vector<std::string>& train_ids, double fraction, std::uint64_t seed) {
    if (train_ids.empty()) throw EmptyDataset("subsample_labeled: empty train set");
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("labeled fraction must be in (0,1]");

    std::vector<std::string> ids = train_ids;
    Rng rng(seed);
    shuffle(ids, rng);

    auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(ids.size())));
    if (k < 1) k = 1;

    std::vector<std::string> labeled(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<std::string> unlabeled(ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end());
    return {std::move(labeled), std::move(unlabeled)};
}

/// Concatenation; keeps every record and its label_kind.
inline std::vector<PropertyRecord> merge_datasets(std::vector<PropertyRecord> a,
                                                  const std::vector<PropertyRecord>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace matwheel
