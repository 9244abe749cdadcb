//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

#include "ribbon/serialization.hpp"

#include "ribbon/shards.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace ribbon {

namespace {

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto v = static_cast<std::uint64_t>(value);
    for (unsigned i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_bytes(std::span<const std::uint8_t> data) {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* field) {
    need(sizeof(T), field);
    std::uint64_t v = 0;
    for (unsigned i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::span<const std::uint8_t> get_bytes(std::size_t count, const char* field) {
    need(count, field);
    auto out = bytes_.subspan(pos_, count);
    pos_ += count;
    return out;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t count, const char* field) const {
    if (bytes_.size() - pos_ < count) {
      throw FormatError(std::string("truncated file while reading ") + field, pos_);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Filter& filter, std::uint16_t key_hash_id) {
  const RibbonConfig& cfg = filter.config();
  Writer out;
  for (char c : kFileMagic) out.put(static_cast<std::uint8_t>(c));
  out.put(kFormatVersion);
  out.put(static_cast<std::uint8_t>(cfg.variant));
  out.put(static_cast<std::uint8_t>(filter.layout()));
  out.put(static_cast<std::uint16_t>(cfg.w));
  out.put(static_cast<std::uint8_t>(cfg.r_lower));
  out.put(std::uint8_t{0});
  out.put(static_cast<std::uint16_t>(cfg.smash));
  out.put(key_hash_id);
  out.put(static_cast<std::uint64_t>(cfg.upper_start_block));
  out.put(static_cast<std::uint64_t>(cfg.m));
  out.put(static_cast<std::uint64_t>(filter.num_keys()));
  out.put(cfg.seed);
  out.put_bytes(filter.solution_bytes());
  if (const BalancedMetadata* meta = filter.balanced()) {
    out.put(static_cast<std::uint64_t>(meta->plan.num_shards));
    out.put(static_cast<std::uint64_t>(meta->last_shard_starts));
    out.put(std::bit_cast<std::uint64_t>(meta->plan.alpha));
    out.put_bytes(meta->bump_masks);
  }
  return out.take();
}

Filter deserialize(std::span<const std::uint8_t> bytes, std::uint16_t* key_hash_id) {
  Reader in(bytes);
  const auto magic = in.get_bytes(4, "magic");
  if (std::memcmp(magic.data(), kFileMagic, 4) != 0) throw FormatError("bad magic", 0);
  const std::size_t version_at = in.pos();
  if (in.get<std::uint16_t>("version") != kFormatVersion) {
    throw FormatError("unsupported format version", version_at);
  }
  RibbonConfig cfg;
  const std::size_t variant_at = in.pos();
  const auto variant = in.get<std::uint8_t>("variant");
  if (variant > 2) throw FormatError("unknown variant code", variant_at);
  cfg.variant = static_cast<Variant>(variant);
  const std::size_t layout_at = in.pos();
  const auto layout_code = in.get<std::uint8_t>("layout");
  if (layout_code > 1) throw FormatError("unknown layout code", layout_at);
  const auto layout = static_cast<Layout>(layout_code);
  cfg.w = in.get<std::uint16_t>("w");
  cfg.r_lower = in.get<std::uint8_t>("r_lower");
  in.get<std::uint8_t>("reserved");
  cfg.smash = in.get<std::uint16_t>("smash");
  const auto hash_id = in.get<std::uint16_t>("key hash id");
  if (key_hash_id != nullptr) *key_hash_id = hash_id;
  cfg.upper_start_block = in.get<std::uint64_t>("upper_start_block");
  cfg.m = in.get<std::uint64_t>("m");
  const auto n = in.get<std::uint64_t>("n");
  cfg.seed = in.get<std::uint64_t>("seed");
  try {
    cfg.validate(layout);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid header: ") + e.what(), kHeaderBytes);
  }

  // Sized from the header alone so a corrupt m cannot trigger a huge allocation.
  const std::size_t blocks = cfg.num_blocks();
  const std::size_t words = layout == Layout::kInterleaved
                                ? blocks * cfg.r_lower + (blocks - cfg.upper_start_block)
                                : blocks * cfg.r_upper();
  const auto solution = in.get_bytes(words * cfg.w / 8, "solution words");
  Filter::Storage storage = Filter::storage_from_bytes(cfg, layout, solution);

  std::optional<BalancedMetadata> meta;
  if (cfg.variant == Variant::kBalanced) {
    const std::size_t shards_at = in.pos();
    const auto shards = in.get<std::uint64_t>("shard count");
    if (shards == 0 || (shards & (shards - 1)) != 0 || shards > cfg.num_starts()) {
      throw FormatError("invalid shard count", shards_at);
    }
    BalancedMetadata m;
    m.plan = plan_with_shards(shards, n);
    m.num_starts = cfg.num_starts();
    const std::size_t last_at = in.pos();
    m.last_shard_starts = in.get<std::uint64_t>("last shard starts");
    if (m.last_shard_starts == 0 || m.last_shard_starts > m.num_starts ||
        m.num_starts - m.last_shard_starts < shards - 1) {
      throw FormatError("invalid last shard size", last_at);
    }
    m.plan.alpha = std::bit_cast<double>(in.get<std::uint64_t>("alpha"));
    const auto masks = in.get_bytes(shards, "bump masks");
    m.bump_masks.assign(masks.begin(), masks.end());
    meta = std::move(m);
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes", in.pos());
  return Filter(cfg, n, std::move(storage), std::move(meta));
}

void save_filter(const Filter& filter, const std::filesystem::path& path,
                 std::uint16_t key_hash_id) {
  const auto bytes = serialize(filter, key_hash_id);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Filter load_filter(const std::filesystem::path& path, std::uint16_t* key_hash_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize(bytes, key_hash_id);
}

}  // namespace ribbon
