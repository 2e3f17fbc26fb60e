#include "bcscf/dataset.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string_view>
#include <unordered_set>
#include <utility>

#include "bcscf/errors.hpp"

namespace bcscf {

namespace {

std::int64_t parse_int_field(std::string_view field, long line_no, const char* what) {
  std::int64_t value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty())
    throw ParseError("line " + std::to_string(line_no) + ": malformed " + what + " '" +
                         std::string(field) + "'",
                     line_no);
  return value;
}

// Splits a line into exactly four fields on `sep`; throws ParseError otherwise.
std::array<std::string_view, 4> split4(std::string_view line, std::string_view sep,
                                       long line_no) {
  std::array<std::string_view, 4> out;
  std::size_t pos = 0;
  for (int f = 0; f < 3; ++f) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields separated by '" +
                           std::string(sep) + "'",
                       line_no);
    out[f] = line.substr(pos, next - pos);
    pos = next + sep.size();
  }
  if (line.find(sep, pos) != std::string_view::npos)
    throw ParseError("line " + std::to_string(line_no) + ": more than 4 fields", line_no);
  out[3] = line.substr(pos);
  return out;
}

// Uniform draw in [0, bound) by rejection; platform-independent for a fixed seed.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

}  // namespace

RatingsDataset RatingsDataset::from_records(std::vector<RatingRecord> records) {
  RatingsDataset ds;
  ds.records_ = std::move(records);
  std::unordered_set<std::uint64_t> seen_pairs;
  seen_pairs.reserve(ds.records_.size());

  for (const RatingRecord& rec : ds.records_) {
    if (rec.user_id < 1 || rec.item_id < 1)
      throw ValidationError("ids must be >= 1, got user " + std::to_string(rec.user_id) +
                            ", item " + std::to_string(rec.item_id));
    if (!(rec.rating >= 1.0 && rec.rating <= 5.0))
      throw ValidationError("rating " + std::to_string(rec.rating) + " outside [1, 5] for user " +
                            std::to_string(rec.user_id) + ", item " +
                            std::to_string(rec.item_id));
    auto [uit, unew] = ds.user_index_.try_emplace(rec.user_id, ds.num_users());
    if (unew) ds.user_ids_.push_back(rec.user_id);
    auto [iit, inew] = ds.item_index_.try_emplace(rec.item_id, ds.num_items());
    if (inew) ds.item_ids_.push_back(rec.item_id);
    const std::uint64_t key = (static_cast<std::uint64_t>(uit->second) << 32) |
                              static_cast<std::uint32_t>(iit->second);
    if (!seen_pairs.insert(key).second)
      throw ValidationError("duplicate rating for user " + std::to_string(rec.user_id) +
                            ", item " + std::to_string(rec.item_id));
  }
  return ds;
}

int RatingsDataset::user_index(std::int64_t user_id) const {
  const auto it = user_index_.find(user_id);
  if (it == user_index_.end())
    throw UnknownIdError("unknown user id " + std::to_string(user_id));
  return it->second;
}

int RatingsDataset::item_index(std::int64_t item_id) const {
  const auto it = item_index_.find(item_id);
  if (it == item_index_.end())
    throw UnknownIdError("unknown item id " + std::to_string(item_id));
  return it->second;
}

RatingsDataset parse_movielens(const std::filesystem::path& path, MovieLensFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ratings file '" + path.string() + "'");
  const std::string_view sep = format == MovieLensFormat::Tab100k ? "\t" : "::";

  std::vector<RatingRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split4(line, sep, line_no);
    RatingRecord rec;
    rec.user_id = parse_int_field(fields[0], line_no, "user id");
    rec.item_id = parse_int_field(fields[1], line_no, "item id");
    // Ratings are whole stars 1-5 in both file formats; stored as reals.
    rec.rating = static_cast<double>(parse_int_field(fields[2], line_no, "rating"));
    rec.timestamp = parse_int_field(fields[3], line_no, "timestamp");
    records.push_back(rec);
  }
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  if (records.empty())
    throw ValidationError("no rating records found in '" + path.string() + "'");

  try {
    return RatingsDataset::from_records(std::move(records));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

FoldPlan make_folds(const RatingsDataset& ds, int n_folds, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (n_folds < 2) throw ArgumentError("make_folds: need at least 2 folds");
  if (static_cast<std::size_t>(n_folds) > n)
    throw ArgumentError("make_folds: " + std::to_string(n_folds) + " folds exceed " +
                        std::to_string(n) + " records");

  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[bounded_draw(rng, i + 1)]);

  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.assignments.assign(n, -1);
  const std::size_t base = n / static_cast<std::size_t>(n_folds);
  const std::size_t remainder = n % static_cast<std::size_t>(n_folds);
  std::size_t pos = 0;
  for (int fold = 0; fold < n_folds; ++fold) {
    const std::size_t size = base + (static_cast<std::size_t>(fold) < remainder ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) plan.assignments[perm[pos++]] = fold;
  }
  return plan;
}

TrainTestSplit split(const RatingsDataset& ds, const FoldPlan& plan, int test_fold) {
  if (plan.assignments.size() != ds.size())
    throw ArgumentError("split: fold plan covers " + std::to_string(plan.assignments.size()) +
                        " records but dataset has " + std::to_string(ds.size()));
  if (test_fold < 0 || test_fold >= plan.n_folds)
    throw ArgumentError("split: test fold " + std::to_string(test_fold) + " outside [0, " +
                        std::to_string(plan.n_folds) + ")");

  std::vector<std::int32_t> rows, cols;
  std::vector<double> vals;
  std::vector<RatingRecord> test;
  const auto records = ds.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (plan.assignments[i] == test_fold) {
      test.push_back(records[i]);
    } else {
      rows.push_back(static_cast<std::int32_t>(ds.user_index(records[i].user_id)));
      cols.push_back(static_cast<std::int32_t>(ds.item_index(records[i].item_id)));
      vals.push_back(records[i].rating);
    }
  }
  return TrainTestSplit{
      MaskedMatrix(ds.num_users(), ds.num_items(), std::move(rows), std::move(cols),
                   std::move(vals)),
      std::move(test)};
}

}  // namespace bcscf
