#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "bcscf/solver.hpp"

namespace bcscf {

/// A trained model plus the original-id maps needed to serve predictions by
/// MovieLens ids.
struct SavedModel {
  std::vector<std::int64_t> user_ids;  // dense index -> original id
  std::vector<std::int64_t> item_ids;
  FactorModel model;

  /// Dense index for an original id; throws UnknownIdError if absent.
  int user_index(std::int64_t user_id) const;
  int item_index(std::int64_t item_id) const;

  /// Builds the reverse lookup tables; called by load_model automatically.
  void rebuild_index();

 private:
  std::unordered_map<std::int64_t, int> user_lookup_;
  std::unordered_map<std::int64_t, int> item_lookup_;
};

/// Binary model file, version 1. Fixed little-endian layout: magic
/// "BCSCFMDL", version byte, solver config, baseline, id maps, observation
/// masks, then U and V in row-major order as 64-bit reals.
void save_model(const std::filesystem::path& path, const SavedModel& model);

/// Loads and validates a model file written by save_model. Corrupt or
/// truncated files raise IoError.
SavedModel load_model(const std::filesystem::path& path);

}  // namespace bcscf
