#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bcscf/linalg.hpp"

namespace bcscf {

/// One rating line: original (1-based) MovieLens ids, integer rating stored
/// as a real, timestamp carried but unused.
struct RatingRecord {
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

enum class MovieLensFormat {
  Tab100k,  // user<TAB>item<TAB>rating<TAB>timestamp
  Colon1m,  // user::item::rating::timestamp
};

/// Immutable rating collection with dense 0-based index maps for users and
/// items, assigned in order of first appearance.
class RatingsDataset {
 public:
  /// Builds index maps and validates invariants (ids >= 1, rating in [1,5],
  /// no duplicate (user, item) pair).
  static RatingsDataset from_records(std::vector<RatingRecord> records);

  std::span<const RatingRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  int num_users() const { return static_cast<int>(user_ids_.size()); }
  int num_items() const { return static_cast<int>(item_ids_.size()); }

  /// Dense index of an original id; throws UnknownIdError if unmapped.
  int user_index(std::int64_t user_id) const;
  int item_index(std::int64_t item_id) const;
  bool has_user(std::int64_t user_id) const { return user_index_.count(user_id) > 0; }
  bool has_item(std::int64_t item_id) const { return item_index_.count(item_id) > 0; }

  /// Original ids in dense-index order (the inverse maps).
  std::span<const std::int64_t> user_ids() const { return user_ids_; }
  std::span<const std::int64_t> item_ids() const { return item_ids_; }

 private:
  RatingsDataset() = default;

  std::vector<RatingRecord> records_;
  std::unordered_map<std::int64_t, int> user_index_;
  std::unordered_map<std::int64_t, int> item_index_;
  std::vector<std::int64_t> user_ids_;
  std::vector<std::int64_t> item_ids_;
};

/// Parses a MovieLens ratings file. Empty lines are ignored; anything else
/// that does not match the format is a ParseError carrying the line number.
RatingsDataset parse_movielens(const std::filesystem::path& path, MovieLensFormat format);

/// Deterministic record-level assignment of every record to one of n_folds
/// near-equal blocks (sizes differ by at most one).
struct FoldPlan {
  int n_folds = 0;
  std::vector<int> assignments;  // per record, in dataset order
  std::uint64_t seed = 0;
};

/// Seeded Fisher-Yates permutation chopped into n_folds blocks; the first
/// (size % n_folds) folds take the extra record. Identical inputs give
/// byte-identical plans on any platform.
FoldPlan make_folds(const RatingsDataset& ds, int n_folds, std::uint64_t seed);

struct TrainTestSplit {
  MaskedMatrix train;              // over the full M x N index space of the dataset
  std::vector<RatingRecord> test;  // held-out records, original ids
};

/// Train/test partition for one fold. Train keeps the dataset's global index
/// space, so users/items seen only in the test fold stay representable.
TrainTestSplit split(const RatingsDataset& ds, const FoldPlan& plan, int test_fold);

}  // namespace bcscf
