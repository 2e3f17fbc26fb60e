#include "bcscf/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "bcscf/errors.hpp"

namespace bcscf {

namespace {

constexpr char kMagic[8] = {'B', 'C', 'S', 'C', 'F', 'M', 'D', 'L'};
constexpr std::uint8_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  }

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

  void u64(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, 8);
  }

  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void u32(std::uint32_t v) { u64(v); }  // stored as 8 bytes for layout uniformity

  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

  void finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw IoError("write failure on '" + path.string() + "'");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw IoError("cannot open model file '" + path_ + "'");
  }

  std::uint8_t u8() {
    const int c = in_.get();
    if (c == std::ifstream::traits_type::eof()) fail("truncated");
    return static_cast<std::uint8_t>(c);
  }

  std::uint64_t u64() {
    char buf[8];
    if (!in_.read(buf, 8)) fail("truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[i])) << (8 * i);
    return v;
  }

  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  void raw(char* data, std::size_t n) {
    if (!in_.read(data, static_cast<std::streamsize>(n))) fail("truncated");
  }

  void expect_eof() {
    if (in_.peek() != std::ifstream::traits_type::eof()) fail("trailing bytes");
  }

  [[noreturn]] void fail(const std::string& why) {
    throw IoError("corrupt model file '" + path_ + "': " + why);
  }

 private:
  std::ifstream in_;
  std::string path_;
};

void check_finite(const Matrix& m, Reader& r, const char* what) {
  if (!m.allFinite()) r.fail(std::string("non-finite entries in ") + what);
}

}  // namespace

int SavedModel::user_index(std::int64_t user_id) const {
  const auto it = user_lookup_.find(user_id);
  if (it == user_lookup_.end())
    throw UnknownIdError("unknown user id " + std::to_string(user_id));
  return it->second;
}

int SavedModel::item_index(std::int64_t item_id) const {
  const auto it = item_lookup_.find(item_id);
  if (it == item_lookup_.end())
    throw UnknownIdError("unknown item id " + std::to_string(item_id));
  return it->second;
}

void SavedModel::rebuild_index() {
  user_lookup_.clear();
  item_lookup_.clear();
  for (std::size_t i = 0; i < user_ids.size(); ++i)
    user_lookup_.emplace(user_ids[i], static_cast<int>(i));
  for (std::size_t i = 0; i < item_ids.size(); ++i)
    item_lookup_.emplace(item_ids[i], static_cast<int>(i));
}

void save_model(const std::filesystem::path& path, const SavedModel& saved) {
  const FactorModel& m = saved.model;
  const auto M = static_cast<std::uint64_t>(m.U.rows());
  const auto N = static_cast<std::uint64_t>(m.V.cols());
  const auto k = static_cast<std::uint64_t>(m.U.cols());
  if (saved.user_ids.size() != M || saved.item_ids.size() != N ||
      m.user_observed.size() != M || m.item_observed.size() != N ||
      static_cast<std::uint64_t>(m.V.rows()) != k ||
      static_cast<std::uint64_t>(m.baseline.b_user.size()) != M ||
      static_cast<std::uint64_t>(m.baseline.b_item.size()) != N)
    throw ArgumentError("save_model: inconsistent model dimensions");

  Writer w(path);
  w.raw(kMagic, sizeof kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(m.config.variant));
  w.u64(static_cast<std::uint64_t>(m.config.rank));
  w.u64(static_cast<std::uint64_t>(m.config.max_outer_iters));
  w.u64(static_cast<std::uint64_t>(m.config.inner_v_steps));
  w.f64(m.config.lambda_u);
  w.f64(m.config.lambda_v);
  w.f64(m.config.obj_tol);
  w.u64(m.config.seed);
  w.f64(m.baseline.delta);
  w.f64(m.baseline.mu_g);
  w.u64(M);
  w.u64(N);
  for (const auto id : saved.user_ids) w.i64(id);
  for (const auto id : saved.item_ids) w.i64(id);
  for (std::uint64_t i = 0; i < M; ++i) w.f64(m.baseline.b_user[static_cast<Eigen::Index>(i)]);
  for (std::uint64_t i = 0; i < N; ++i) w.f64(m.baseline.b_item[static_cast<Eigen::Index>(i)]);
  for (const auto flag : m.user_observed) w.u8(flag);
  for (const auto flag : m.item_observed) w.u8(flag);
  for (std::uint64_t r = 0; r < M; ++r)
    for (std::uint64_t c = 0; c < k; ++c)
      w.f64(m.U(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
  for (std::uint64_t r = 0; r < k; ++r)
    for (std::uint64_t c = 0; c < N; ++c)
      w.f64(m.V(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
  w.finish(path);
}

SavedModel load_model(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) r.fail("bad magic");
  const auto version = r.u8();
  if (version != kVersion)
    r.fail("unsupported version " + std::to_string(static_cast<int>(version)));

  SavedModel saved;
  FactorModel& m = saved.model;
  const auto variant_byte = r.u8();
  if (variant_byte > 1) r.fail("bad variant byte");
  m.config.variant = static_cast<Variant>(variant_byte);
  m.config.rank = static_cast<int>(r.u64());
  m.config.max_outer_iters = static_cast<int>(r.u64());
  m.config.inner_v_steps = static_cast<int>(r.u64());
  m.config.lambda_u = r.f64();
  m.config.lambda_v = r.f64();
  m.config.obj_tol = r.f64();
  m.config.seed = r.u64();
  m.baseline.delta = r.f64();
  m.baseline.mu_g = r.f64();
  const std::uint64_t M = r.u64();
  const std::uint64_t N = r.u64();
  constexpr std::uint64_t kDimLimit = 1ull << 32;
  if (M == 0 || N == 0 || M > kDimLimit || N > kDimLimit || m.config.rank < 1)
    r.fail("implausible dimensions");

  saved.user_ids.resize(M);
  for (auto& id : saved.user_ids) id = r.i64();
  saved.item_ids.resize(N);
  for (auto& id : saved.item_ids) id = r.i64();
  m.baseline.b_user.resize(static_cast<Eigen::Index>(M));
  for (std::uint64_t i = 0; i < M; ++i) m.baseline.b_user[static_cast<Eigen::Index>(i)] = r.f64();
  m.baseline.b_item.resize(static_cast<Eigen::Index>(N));
  for (std::uint64_t i = 0; i < N; ++i) m.baseline.b_item[static_cast<Eigen::Index>(i)] = r.f64();
  m.user_observed.resize(M);
  for (auto& flag : m.user_observed) flag = r.u8();
  m.item_observed.resize(N);
  for (auto& flag : m.item_observed) flag = r.u8();

  const auto k = static_cast<Eigen::Index>(m.config.rank);
  m.U.resize(static_cast<Eigen::Index>(M), k);
  for (Eigen::Index row = 0; row < m.U.rows(); ++row)
    for (Eigen::Index col = 0; col < k; ++col) m.U(row, col) = r.f64();
  m.V.resize(k, static_cast<Eigen::Index>(N));
  for (Eigen::Index row = 0; row < k; ++row)
    for (Eigen::Index col = 0; col < m.V.cols(); ++col) m.V(row, col) = r.f64();
  r.expect_eof();

  check_finite(m.U, r, "U");
  check_finite(m.V, r, "V");
  if (!m.baseline.b_user.allFinite() || !m.baseline.b_item.allFinite() ||
      !std::isfinite(m.baseline.mu_g))
    r.fail("non-finite baseline");
  saved.rebuild_index();
  return saved;
}

}  // namespace bcscf
